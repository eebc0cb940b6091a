#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "biphoton/kernels.hpp"
#include "doctest.h"

using namespace biphoton;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

// Lane-boundary sizes plus a large one.
const std::size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 1000, 4096};

}  // namespace

#ifdef BIPHOTON_HAVE_AVX2

TEST_CASE("lorentzian_dip avx2 is bit-exact against scalar") {
    REQUIRE(kernels::avx2_supported());
    std::mt19937_64 rng(7);
    for (std::size_t n : kSizes) {
        auto nu = random_vector(rng, n, -5e9, 5e9);
        std::vector<double> a(n), b(n);
        kernels::scalar::lorentzian_dip(nu.data(), a.data(), n, 1.2e8, 9e7, 0.8, 1.0);
        kernels::avx2::lorentzian_dip(nu.data(), b.data(), n, 1.2e8, 9e7, 0.8, 1.0);
        if (n > 0) CHECK(std::memcmp(a.data(), b.data(), n * sizeof(double)) == 0);
    }
}

TEST_CASE("scale avx2 is bit-exact against scalar") {
    REQUIRE(kernels::avx2_supported());
    std::mt19937_64 rng(8);
    for (std::size_t n : kSizes) {
        auto in = random_vector(rng, n, -1e6, 1e6);
        std::vector<double> a(n), b(n);
        kernels::scalar::scale(in.data(), a.data(), n, 1.0 / 3.0);
        kernels::avx2::scale(in.data(), b.data(), n, 1.0 / 3.0);
        if (n > 0) CHECK(std::memcmp(a.data(), b.data(), n * sizeof(double)) == 0);
    }
}

TEST_CASE("abs_exp_decay avx2 matches scalar to 1e-13 relative") {
    REQUIRE(kernels::avx2_supported());
    std::mt19937_64 rng(9);
    for (std::size_t n : kSizes) {
        auto x = random_vector(rng, n, -5e4, 5e4);
        std::vector<double> a(n), b(n);
        kernels::scalar::abs_exp_decay(x.data(), a.data(), n, 120.0, 1.0 / 1060.0, 40.0, 1.0);
        kernels::avx2::abs_exp_decay(x.data(), b.data(), n, 120.0, 1.0 / 1060.0, 40.0, 1.0);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::fabs(a[i] - b[i]) <= 1e-13 * std::fabs(a[i]));
    }
}

TEST_CASE("avx2 exp path matches std::exp over a wide range") {
    REQUIRE(kernels::avx2_supported());
    std::vector<double> x;
    for (double v = 0.0; v <= 700.0; v += 0.37) x.push_back(-v);
    const std::size_t n = x.size();
    std::vector<double> want(n), got(n);
    // abs_exp_decay with amplitude 1, background 0, center 0, inv_tau 1 is exp(-|x|)
    kernels::scalar::abs_exp_decay(x.data(), want.data(), n, 0.0, 1.0, 1.0, 0.0);
    kernels::avx2::abs_exp_decay(x.data(), got.data(), n, 0.0, 1.0, 1.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double tol = 1e-13 * std::max(std::fabs(want[i]), 1e-300);
        CHECK(std::fabs(want[i] - got[i]) <= tol);
    }
}

TEST_CASE("reductions agree between backends to 1e-12 relative") {
    REQUIRE(kernels::avx2_supported());
    std::mt19937_64 rng(10);
    for (std::size_t n : kSizes) {
        auto a = random_vector(rng, n, -2.0, 2.0);
        auto b = random_vector(rng, n, -2.0, 2.0);
        const double tol = 1e-12 * (static_cast<double>(n) + 1.0);
        CHECK(std::fabs(kernels::scalar::dot(a.data(), b.data(), n) -
                        kernels::avx2::dot(a.data(), b.data(), n)) <= tol);
        CHECK(std::fabs(kernels::scalar::sum(a.data(), n) -
                        kernels::avx2::sum(a.data(), n)) <= tol);
        CHECK(std::fabs(kernels::scalar::sum_sq(a.data(), n) -
                        kernels::avx2::sum_sq(a.data(), n)) <= tol);
    }
}

#endif  // BIPHOTON_HAVE_AVX2

TEST_CASE("backend dispatch honors set_backend") {
    const auto saved = kernels::active_backend();
    kernels::set_backend(kernels::Backend::scalar);
    CHECK(kernels::active_backend() == kernels::Backend::scalar);
    double x = 2.0, y = 3.0;
    CHECK(kernels::dot(&x, &y, 1) == 6.0);
    kernels::set_backend(saved);
}
