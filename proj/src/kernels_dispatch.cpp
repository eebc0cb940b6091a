// Backend selection: AVX2 when the CPU has it, scalar otherwise.
// BIPHOTON_SIMD=scalar|avx2|auto overrides the automatic choice.

#include <cstdlib>
#include <cstring>

#include "biphoton/kernels.hpp"

namespace biphoton::kernels {

namespace {

Backend detect_backend() {
#ifdef BIPHOTON_HAVE_AVX2
    const char* env = std::getenv("BIPHOTON_SIMD");
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0)
            return avx2_supported() ? Backend::avx2 : Backend::scalar;
    }
    return avx2_supported() ? Backend::avx2 : Backend::scalar;
#else
    return Backend::scalar;
#endif
}

Backend g_backend = detect_backend();

}  // namespace

bool avx2_supported() {
#if defined(BIPHOTON_HAVE_AVX2) && defined(__GNUC__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend active_backend() { return g_backend; }

void set_backend(Backend backend) {
    if (backend == Backend::avx2 && !avx2_supported()) backend = Backend::scalar;
    g_backend = backend;
}

const char* backend_name(Backend backend) {
    return backend == Backend::avx2 ? "avx2" : "scalar";
}

#ifdef BIPHOTON_HAVE_AVX2
#define BIPHOTON_DISPATCH(call_scalar, call_avx2) \
    if (g_backend == Backend::avx2) return call_avx2; \
    return call_scalar
#else
#define BIPHOTON_DISPATCH(call_scalar, call_avx2) return call_scalar
#endif

void lorentzian_dip(const double* nu, double* out, std::size_t n,
                    double nu0, double fwhm, double depth, double baseline) {
    BIPHOTON_DISPATCH(scalar::lorentzian_dip(nu, out, n, nu0, fwhm, depth, baseline),
                      avx2::lorentzian_dip(nu, out, n, nu0, fwhm, depth, baseline));
}

void abs_exp_decay(const double* x, double* out, std::size_t n,
                   double center, double inv_tau, double amplitude, double background) {
    BIPHOTON_DISPATCH(scalar::abs_exp_decay(x, out, n, center, inv_tau, amplitude, background),
                      avx2::abs_exp_decay(x, out, n, center, inv_tau, amplitude, background));
}

void scale(const double* in, double* out, std::size_t n, double factor) {
    BIPHOTON_DISPATCH(scalar::scale(in, out, n, factor),
                      avx2::scale(in, out, n, factor));
}

double dot(const double* a, const double* b, std::size_t n) {
    BIPHOTON_DISPATCH(scalar::dot(a, b, n), avx2::dot(a, b, n));
}

double sum(const double* a, std::size_t n) {
    BIPHOTON_DISPATCH(scalar::sum(a, n), avx2::sum(a, n));
}

double sum_sq(const double* a, std::size_t n) {
    BIPHOTON_DISPATCH(scalar::sum_sq(a, n), avx2::sum_sq(a, n));
}

#undef BIPHOTON_DISPATCH

}  // namespace biphoton::kernels
