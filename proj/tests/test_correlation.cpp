#include <stdexcept>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "biphoton/correlation.hpp"
#include "biphoton/fitting.hpp"
#include "biphoton/pair_source.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace biphoton;

namespace {

std::vector<std::uint64_t> poisson_times(std::mt19937_64& rng, double rate_per_s,
                                         double duration_s, std::uint64_t tick = 84) {
    std::exponential_distribution<double> gap(rate_per_s * 1e-12);
    std::vector<std::uint64_t> times;
    double t = gap(rng);
    const double end = duration_s * 1e12;
    while (t < end) {
        times.push_back(static_cast<std::uint64_t>(std::llround(t / tick)) * tick);
        t += gap(rng);
    }
    return times;
}

struct PairStreams {
    std::vector<std::uint64_t> signal, idler;
    double duration_s;
};

PairStreams ideal_pair_streams(double rate_per_s, double tau_s, double duration_s,
                               std::uint64_t seed, std::uint64_t tick = 84) {
    SourceSpec spec;
    spec.tau_s = tau_s;
    spec.pump_power_mw = std::sqrt(rate_per_s / spec.brightness_cal);
    auto pairs = sample_pairs(spec, duration_s, seed);
    PairStreams out;
    out.duration_s = duration_s;
    for (const auto& ev : pairs) {
        out.signal.push_back(
            static_cast<std::uint64_t>(std::llround(ev.signal_emission_ps() / tick)) * tick);
        out.idler.push_back(
            static_cast<std::uint64_t>(std::llround(ev.idler_emission_ps() / tick)) * tick);
    }
    std::sort(out.signal.begin(), out.signal.end());
    std::sort(out.idler.begin(), out.idler.end());
    return out;
}

}  // namespace

TEST_CASE("two-pointer correlator matches the O(N^2) oracle bin-exactly") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t na = rng() % 1000 + 1;
        const std::size_t nb = rng() % 1000 + 1;
        std::vector<std::uint64_t> a, b;
        std::uniform_int_distribution<std::uint64_t> t_dist(0, 2000000);
        for (std::size_t i = 0; i < na; ++i) a.push_back(t_dist(rng));
        for (std::size_t i = 0; i < nb; ++i) b.push_back(t_dist(rng));
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        const std::int64_t bin = 1 + static_cast<std::int64_t>(rng() % 500);
        const std::int64_t span = bin * (1 + static_cast<std::int64_t>(rng() % 40));
        auto h = cross_correlate_times(a, b, bin, span, 1.0);
        auto want = oracle::brute_force_correlate(a, b, bin, span);
        CHECK(h.counts == want);
    }
}

TEST_CASE("independent streams give the accidental rate in every bin") {
    std::mt19937_64 rng(55);
    const double ra = 1e6, rb = 1e6, t_total = 1.0;
    auto a = poisson_times(rng, ra, t_total);
    auto b = poisson_times(rng, rb, t_total);
    auto h = cross_correlate_times(a, b, 840, 42000, t_total);
    const double expected =
        h.rate_a * h.rate_b * static_cast<double>(h.bin_width_ps) * 1e-12 * t_total;
    for (double c : h.counts) {
        CHECK(std::fabs(c - expected) <= 4.0 * std::sqrt(expected));
    }

    SUBCASE("normalized wings sit at 1") {
        auto g = normalize(h);
        double wing_mean = 0.0;
        for (double v : g.counts) wing_mean += v;
        wing_mean /= static_cast<double>(g.counts.size());
        CHECK(wing_mean >= 0.97);
        CHECK(wing_mean <= 1.03);
    }
}

TEST_CASE("a shifted copy concentrates in a single bin") {
    std::mt19937_64 rng(66);
    auto a = poisson_times(rng, 1e5, 0.1);
    std::vector<std::uint64_t> b;
    for (auto t : a) b.push_back(t + 4200);
    auto h = cross_correlate_times(a, b, 84, 8400, 0.1);
    const std::size_t bin_at_shift = h.center_bin() + 4200 / 84;
    CHECK(h.counts[bin_at_shift] >= static_cast<double>(a.size()));
    double elsewhere = h.total() - h.counts[bin_at_shift];
    // only chance coincidences away from the shift
    CHECK(elsewhere <= 0.05 * h.total());
}

TEST_CASE("mirror symmetry is bin-exact on tick-aligned streams") {
    auto streams = ideal_pair_streams(2e5, 1.77e-9, 0.2, 31337);
    auto ab = cross_correlate_times(streams.signal, streams.idler, 84, 21000, 0.2);
    auto ba = cross_correlate_times(streams.idler, streams.signal, 84, 21000, 0.2);
    REQUIRE(ab.counts.size() == ba.counts.size());
    const std::size_t n = ab.counts.size();
    for (std::size_t k = 0; k < n; ++k) CHECK(ab.counts[k] == ba.counts[n - 1 - k]);
}

TEST_CASE("simulated pairs fit the injected correlation time") {
    for (double tau_ns : {1.0, 1.8, 2.65, 5.0}) {
        const double tau_s = tau_ns * 1e-9;
        auto streams = ideal_pair_streams(2.2e6, tau_s, 0.5, 1000 + int(tau_ns * 10));
        REQUIRE(streams.signal.size() >= 1000000);
        auto h = cross_correlate_times(streams.signal, streams.idler, 84, 50000,
                                       streams.duration_s);
        auto g = normalize(h);
        auto fit = fit_double_exponential(g);
        REQUIRE(fit.converged);
        CHECK(fit.param("tau_ps") == doctest::Approx(tau_ns * 1e3).epsilon(0.05));
        CHECK(fit.param("dnu_hz") ==
              doctest::Approx(tau_s_to_bandwidth_hz(tau_s)).epsilon(0.05));
    }
}

TEST_CASE("normalization") {
    SUBCASE("zero acquisition time is an error") {
        Histogram h;
        h.counts = {1.0, 2.0, 1.0};
        h.acquisition_s = 0.0;
        CHECK_THROWS_AS(normalize(h), std::invalid_argument);
    }

    SUBCASE("doubling acquisition time leaves g unchanged within statistics") {
        auto s1 = ideal_pair_streams(4e5, 1.77e-9, 0.25, 11);
        auto s2 = ideal_pair_streams(4e5, 1.77e-9, 0.5, 11);
        auto g1 = normalize(
            cross_correlate_times(s1.signal, s1.idler, 840, 33600, s1.duration_s));
        auto g2 = normalize(
            cross_correlate_times(s2.signal, s2.idler, 840, 33600, s2.duration_s));
        const double peak1 = g1.counts[g1.center_bin()];
        const double peak2 = g2.counts[g2.center_bin()];
        CHECK(peak1 == doctest::Approx(peak2).epsilon(0.15));
    }

    SUBCASE("low occupancy gives a strong zero-delay peak, g(0) = 1 + 1/(R bin)") {
        const double rate = 1e5;
        const double tau_s = 0.2e-9;
        auto streams = ideal_pair_streams(rate, tau_s, 1.0, 2021);
        // bin much wider than tau: all pair delays land in the center bin
        const std::int64_t bin = 84000;  // 84 ns
        auto g = normalize(cross_correlate_times(streams.signal, streams.idler, bin,
                                                 10 * bin, streams.duration_s));
        const double expected_peak = 1.0 + 1.0 / (rate * static_cast<double>(bin) * 1e-12);
        CHECK(g.counts[g.center_bin()] == doctest::Approx(expected_peak).epsilon(0.05));
        CHECK(g.counts[g.center_bin()] > 10.0);
    }
}

TEST_CASE("background correction") {
    SUBCASE("flat histograms go to zero") {
        std::mt19937_64 rng(5);
        auto a = poisson_times(rng, 5e5, 0.5);
        auto b = poisson_times(rng, 5e5, 0.5);
        auto h = cross_correlate_times(a, b, 840, 84000, 0.5);
        auto corrected = background_correct(h);
        double mean = 0.0;
        for (double c : corrected.counts) mean += c;
        mean /= static_cast<double>(corrected.counts.size());
        // clamping at zero leaves half-noise positives only
        CHECK(mean <= 2.0 * std::sqrt(corrected.background_estimate));
    }

    SUBCASE("synthetic peak area is recovered within 3%") {
        Histogram h;
        h.bin_width_ps = 100;
        h.acquisition_s = 1.0;
        h.rate_a = h.rate_b = 1e5;
        h.counts.assign(401, 500.0);
        double injected = 0.0;
        std::mt19937_64 rng(6);
        for (int k = -15; k <= 15; ++k) {
            const double add = 4000.0 * std::exp(-std::fabs(k) / 6.0);
            h.counts[static_cast<std::size_t>(200 + k)] += add;
            injected += add;
        }
        for (auto& c : h.counts) c = std::floor(c + 0.5);
        auto corrected = background_correct(h);
        CHECK(corrected.background_estimate == doctest::Approx(500.0).epsilon(0.01));
        double area = 0.0;
        for (int k = -30; k <= 30; ++k) area += corrected.counts[static_cast<std::size_t>(200 + k)];
        CHECK(area == doctest::Approx(injected).epsilon(0.03));
    }

    SUBCASE("correction is idempotent within noise") {
        std::mt19937_64 rng(7);
        auto a = poisson_times(rng, 3e5, 0.5);
        auto b = poisson_times(rng, 3e5, 0.5);
        auto h = cross_correlate_times(a, b, 840, 84000, 0.5);
        auto once = background_correct(h);
        auto twice = background_correct(once);
        CHECK(std::fabs(twice.background_estimate) <=
              2.0 * std::sqrt(once.background_estimate));
    }

    SUBCASE("too few wing bins is an error") {
        Histogram h;
        h.bin_width_ps = 100;
        h.counts.assign(21, 10.0);
        h.counts[10] = 100.0;
        CHECK_THROWS_AS(background_correct(h), std::invalid_argument);
    }
}

TEST_CASE("HBT autocorrelation") {
    SUBCASE("Poisson light gives g2(0) = 1") {
        std::mt19937_64 rng(8);
        auto times = poisson_times(rng, 2e6, 0.6);
        REQUIRE(times.size() >= 1000000);
        auto g = autocorrelate_hbt_times(times, 0.6, 0.5, 840, 42000, 123);
        CHECK(central_mean(g, 5) == doctest::Approx(1.0).epsilon(0.05));
    }

    SUBCASE("degenerate splitter returns an empty histogram, not an error") {
        std::mt19937_64 rng(9);
        auto times = poisson_times(rng, 1e5, 0.01);
        auto g = autocorrelate_hbt_times(times, 0.01, 0.0, 840, 8400, 5);
        CHECK(g.total() == 0.0);
        CHECK_FALSE(g.normalized);
    }
}

TEST_CASE("windowed coincidence counting") {
    SUBCASE("independent streams have CAR near zero") {
        std::mt19937_64 rng(10);
        auto a = poisson_times(rng, 1e6, 0.5);
        auto b = poisson_times(rng, 1e6, 0.5);
        auto res = coincidence_count(a, b, 2000.0, 0.0, 0.5);
        const double sigma = std::sqrt(res.accidentals_estimate);
        CHECK(std::fabs(res.coincidences - res.accidentals_estimate) <= 4.0 * sigma);
        CHECK(std::fabs(res.car) <= 4.0 * sigma / res.accidentals_estimate);
    }

    SUBCASE("lossless pairs with a wide window catch every pair") {
        auto streams = ideal_pair_streams(1e5, 1e-9, 1.0, 2022);
        auto res = coincidence_count(streams.signal, streams.idler, 2.0e4, 0.0, 1.0);
        CHECK(res.coincidences >= static_cast<double>(streams.signal.size()));
        CHECK(res.coincidences <=
              1.02 * static_cast<double>(streams.signal.size()) + res.accidentals_estimate);
        CHECK(res.car > 100.0);
    }

    SUBCASE("halving efficiency quarters coincidences and halves singles") {
        auto streams = ideal_pair_streams(2e6, 1e-9, 0.5, 2023);
        std::mt19937_64 rng(11);
        auto thin = [&rng](const std::vector<std::uint64_t>& in, double p) {
            std::vector<std::uint64_t> out;
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (auto t : in)
                if (u(rng) < p) out.push_back(t);
            return out;
        };
        auto s_half = thin(streams.signal, 0.5);
        auto i_half = thin(streams.idler, 0.5);
        const auto full = coincidence_count(streams.signal, streams.idler, 8000.0, 0.0, 0.5);
        const auto half = coincidence_count(s_half, i_half, 8000.0, 0.0, 0.5);
        CHECK(static_cast<double>(s_half.size()) ==
              doctest::Approx(0.5 * static_cast<double>(streams.signal.size())).epsilon(0.01));
        CHECK(half.coincidences == doctest::Approx(0.25 * full.coincidences).epsilon(0.05));
    }
}

TEST_CASE("empty inputs produce an empty histogram with zero rates") {
    std::vector<std::uint64_t> empty;
    auto h = cross_correlate_times(empty, empty, 84, 840, 1.0);
    CHECK(h.total() == 0.0);
    CHECK(h.rate_a == 0.0);
    CHECK(h.rate_b == 0.0);
}
