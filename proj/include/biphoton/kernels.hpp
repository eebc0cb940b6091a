#pragma once

// Numeric kernels for the data-parallel inner loops: batch model evaluation
// for the fitters and scan synthesis, plus the reductions used by the
// least-squares engine.
//
// Each kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant.  The active backend is picked once at startup (CPUID, overridable
// with BIPHOTON_SIMD=scalar|avx2|auto) and the two are equivalence-tested:
// bit-exact for the purely rational element-wise kernels, bounded relative
// error for exp() and the reductions.

#include <cstddef>

namespace biphoton::kernels {

enum class Backend { scalar, avx2 };

Backend active_backend();
void set_backend(Backend backend);  // falls back to scalar if unsupported
const char* backend_name(Backend backend);
bool avx2_supported();

// out[i] = baseline - depth * (fwhm/2)^2 / ((nu[i] - nu0)^2 + (fwhm/2)^2)
void lorentzian_dip(const double* nu, double* out, std::size_t n,
                    double nu0, double fwhm, double depth, double baseline);

// out[i] = background + amplitude * exp(-|x[i] - center| * inv_tau)
void abs_exp_decay(const double* x, double* out, std::size_t n,
                   double center, double inv_tau, double amplitude, double background);

// out[i] = in[i] * factor
void scale(const double* in, double* out, std::size_t n, double factor);

double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sum_sq(const double* a, std::size_t n);

namespace scalar {
void lorentzian_dip(const double* nu, double* out, std::size_t n,
                    double nu0, double fwhm, double depth, double baseline);
void abs_exp_decay(const double* x, double* out, std::size_t n,
                   double center, double inv_tau, double amplitude, double background);
void scale(const double* in, double* out, std::size_t n, double factor);
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sum_sq(const double* a, std::size_t n);
}  // namespace scalar

#ifdef BIPHOTON_HAVE_AVX2
namespace avx2 {
void lorentzian_dip(const double* nu, double* out, std::size_t n,
                    double nu0, double fwhm, double depth, double baseline);
void abs_exp_decay(const double* x, double* out, std::size_t n,
                   double center, double inv_tau, double amplitude, double background);
void scale(const double* in, double* out, std::size_t n, double factor);
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sum_sq(const double* a, std::size_t n);
}  // namespace avx2
#endif

}  // namespace biphoton::kernels
