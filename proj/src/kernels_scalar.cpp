// Scalar reference kernels.  These define the semantics the SIMD variants are
// tested against; compiled with -ffp-contract=off so the element-wise rational
// kernels are reproducible operation-for-operation.

#include <cmath>

#include "biphoton/kernels.hpp"

namespace biphoton::kernels::scalar {

void lorentzian_dip(const double* nu, double* out, std::size_t n,
                    double nu0, double fwhm, double depth, double baseline) {
    const double hw = fwhm * 0.5;
    const double hw2 = hw * hw;
    for (std::size_t i = 0; i < n; ++i) {
        double d = nu[i] - nu0;
        out[i] = baseline - depth * hw2 / (d * d + hw2);
    }
}

void abs_exp_decay(const double* x, double* out, std::size_t n,
                   double center, double inv_tau, double amplitude, double background) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = background + amplitude * std::exp(-std::fabs(x[i] - center) * inv_tau);
    }
}

void scale(const double* in, double* out, std::size_t n, double factor) {
    for (std::size_t i = 0; i < n; ++i) out[i] = in[i] * factor;
}

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

double sum_sq(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
    return acc;
}

}  // namespace biphoton::kernels::scalar
