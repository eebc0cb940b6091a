// AVX2 kernel variants.  The rational element-wise kernels use only
// mul/add/div in the same per-element order as the scalar reference, so they
// are bit-identical to it.  abs_exp_decay uses a Cephes-style exp() (range
// reduction by ln2, rational approximation, exponent reassembly), accurate to
// a few ulp over [-708, 708] and flushed to zero below; the reductions use a
// 4-lane accumulator.  Those are tolerance-tested against the reference.

#ifdef BIPHOTON_HAVE_AVX2

#include <immintrin.h>

#include <cmath>

#include "biphoton/kernels.hpp"

namespace biphoton::kernels::avx2 {

namespace {

constexpr double kLog2E = 1.4426950408889634073599;
constexpr double kLn2Hi = 6.93145751953125e-1;
constexpr double kLn2Lo = 1.42860682030941723212e-6;
constexpr double kExpLo = -708.0;
constexpr double kExpHi = 708.0;

constexpr double kExpP0 = 1.26177193074810590878e-4;
constexpr double kExpP1 = 3.02994407707441961300e-2;
constexpr double kExpP2 = 9.99999999999999999910e-1;
constexpr double kExpQ0 = 3.00198505138664455042e-6;
constexpr double kExpQ1 = 2.52448340349684104192e-3;
constexpr double kExpQ2 = 2.27265548208155028766e-1;
constexpr double kExpQ3 = 2.00000000000000000005e0;

inline __m256d exp_pd(__m256d x) {
    const __m256d underflow = _mm256_cmp_pd(x, _mm256_set1_pd(kExpLo), _CMP_LT_OQ);
    x = _mm256_max_pd(x, _mm256_set1_pd(kExpLo));
    x = _mm256_min_pd(x, _mm256_set1_pd(kExpHi));

    // n = round(x / ln2); r = x - n*ln2 with ln2 split for accuracy.
    __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kLog2E)),
                                _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Hi), x);
    r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Lo), r);

    __m256d rr = _mm256_mul_pd(r, r);
    __m256d p = _mm256_set1_pd(kExpP0);
    p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(kExpP1));
    p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(kExpP2));
    p = _mm256_mul_pd(p, r);

    __m256d q = _mm256_set1_pd(kExpQ0);
    q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(kExpQ1));
    q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(kExpQ2));
    q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(kExpQ3));

    // e^r = 1 + 2*p/(q - p)
    __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
    e = _mm256_fmadd_pd(e, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

    // scale by 2^n via the exponent field
    __m128i n32 = _mm256_cvtpd_epi32(n);
    __m256i n64 = _mm256_cvtepi32_epi64(n32);
    __m256i pow2 = _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
    e = _mm256_mul_pd(e, _mm256_castsi256_pd(pow2));

    return _mm256_andnot_pd(underflow, e);
}

inline double hsum_pd(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

}  // namespace

void lorentzian_dip(const double* nu, double* out, std::size_t n,
                    double nu0, double fwhm, double depth, double baseline) {
    const double hw = fwhm * 0.5;
    const double hw2 = hw * hw;
    const __m256d vnu0 = _mm256_set1_pd(nu0);
    const __m256d vhw2 = _mm256_set1_pd(hw2);
    const __m256d vdepth = _mm256_set1_pd(depth);
    const __m256d vbase = _mm256_set1_pd(baseline);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(nu + i), vnu0);
        __m256d denom = _mm256_add_pd(_mm256_mul_pd(d, d), vhw2);
        __m256d dip = _mm256_div_pd(_mm256_mul_pd(vdepth, vhw2), denom);
        _mm256_storeu_pd(out + i, _mm256_sub_pd(vbase, dip));
    }
    for (; i < n; ++i) {
        double d = nu[i] - nu0;
        out[i] = baseline - depth * hw2 / (d * d + hw2);
    }
}

void abs_exp_decay(const double* x, double* out, std::size_t n,
                   double center, double inv_tau, double amplitude, double background) {
    const __m256d vc = _mm256_set1_pd(center);
    const __m256d vneg_inv_tau = _mm256_set1_pd(-inv_tau);
    const __m256d vamp = _mm256_set1_pd(amplitude);
    const __m256d vbg = _mm256_set1_pd(background);
    const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_and_pd(_mm256_sub_pd(_mm256_loadu_pd(x + i), vc), abs_mask);
        __m256d e = exp_pd(_mm256_mul_pd(d, vneg_inv_tau));
        _mm256_storeu_pd(out + i, _mm256_add_pd(vbg, _mm256_mul_pd(vamp, e)));
    }
    for (; i < n; ++i) {
        out[i] = background + amplitude * std::exp(-std::fabs(x[i] - center) * inv_tau);
    }
}

void scale(const double* in, double* out, std::size_t n, double factor) {
    const __m256d vf = _mm256_set1_pd(factor);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(in + i), vf));
    for (; i < n; ++i) out[i] = in[i] * factor;
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    double s = hsum_pd(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    double s = hsum_pd(acc);
    for (; i < n; ++i) s += a[i];
    return s;
}

double sum_sq(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(a + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double s = hsum_pd(acc);
    for (; i < n; ++i) s += a[i] * a[i];
    return s;
}

}  // namespace biphoton::kernels::avx2

#endif  // BIPHOTON_HAVE_AVX2
