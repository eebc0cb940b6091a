#include <stdexcept>
#include <cmath>
#include <vector>

#include "biphoton/pair_source.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace biphoton;

TEST_CASE("pair rate follows the calibrated scaling laws") {
    SourceSpec spec;  // Q = 2e6 reference, gamma = 1, L = 2 pi 115 um

    SUBCASE("paper operating point: 3 mW at Q = 2e6 gives 3.5e7 pairs/s") {
        spec.pump_power_mw = 3.0;
        CHECK(pair_rate(spec) == doctest::Approx(3.5e7).epsilon(1e-12));
    }

    SUBCASE("zero pump gives zero rate") {
        spec.pump_power_mw = 0.0;
        CHECK(pair_rate(spec) == 0.0);
    }

    SUBCASE("doubling Q multiplies the rate by 8") {
        spec.pump_power_mw = 1.0;
        const double base = pair_rate(spec);
        spec.q_loaded = 4e6;
        CHECK(pair_rate(spec) == doctest::Approx(8.0 * base).epsilon(1e-12));
    }

    SUBCASE("model-level power scaling is exactly quadratic") {
        std::vector<double> log_p, log_r;
        for (double p : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) {
            spec.pump_power_mw = p;
            log_p.push_back(std::log(p));
            log_r.push_back(std::log(pair_rate(spec)));
        }
        const auto fit = oracle::linear_regression(log_p, log_r);
        CHECK(std::fabs(fit.slope - 2.0) <= 1e-6);
    }
}

TEST_CASE("modal brightness") {
    SUBCASE("paper numbers: 3.9e6 s^-1 mW^-2 at 90 MHz") {
        const double mb = modal_brightness(3.9e6, 90e6);
        CHECK(mb == doctest::Approx(0.0138).epsilon(0.01));
        CHECK(std::fabs(mb - 0.015) / 0.015 < 0.15);
    }

    SUBCASE("0.1 pairs per mode near 2.5 mW") {
        const double mb = modal_brightness(3.9e6, 90e6);
        const double at_2p5 = mb * 2.5 * 2.5;
        CHECK(at_2p5 >= 0.086);
        CHECK(at_2p5 <= 0.094);
    }

    SUBCASE("vanishing mode duration") {
        CHECK(modal_brightness(3.9e6, 1e15) < 1e-8);
    }
}

TEST_CASE("multipair fraction") {
    SourceSpec spec;
    // mu = R * 2 tau = 0.1: choose power for that occupation
    const double mu_target = 0.1;
    spec.pump_power_mw = std::sqrt(mu_target / (spec.brightness_cal * 2.0 * spec.tau_s));

    SUBCASE("Poisson tail at mu = 0.1") {
        spec.mode = SourceMode::poisson_pairs;
        const double mu = mean_pairs_per_mode(spec);
        REQUIRE(mu == doctest::Approx(0.1).epsilon(1e-9));
        const double frac = multipair_fraction(spec);
        CHECK(frac == doctest::Approx(oracle::poisson_tail_ge2(mu)).epsilon(1e-9));
        CHECK(frac == doctest::Approx(0.0047).epsilon(0.02));
        const double conditional = frac / (1.0 - std::exp(-mu));
        CHECK(conditional == doctest::Approx(0.048).epsilon(0.05));
    }

    SUBCASE("geometric occupation matches the series and dominates Poisson") {
        // the brute-force sums show the thermal tail exceeds the Poisson one
        // only up to mu ~ 0.86; the source operates at mu <= 0.1
        for (double mu : {0.02, 0.1, 0.5}) {
            spec.pump_power_mw = std::sqrt(mu / (spec.brightness_cal * 2.0 * spec.tau_s));
            spec.mode = SourceMode::gaussian_field;
            CHECK(multipair_fraction(spec) ==
                  doctest::Approx(oracle::geometric_tail_ge2(mu)).epsilon(1e-6));
            const double geometric = multipair_fraction(spec);
            spec.mode = SourceMode::poisson_pairs;
            CHECK(geometric >= multipair_fraction(spec));
            CHECK(multipair_fraction(spec) ==
                  doctest::Approx(oracle::poisson_tail_ge2(mu)).epsilon(1e-6));
        }
    }

    SUBCASE("zero pump never multi-pairs") {
        spec.pump_power_mw = 0.0;
        CHECK(multipair_fraction(spec) == 0.0);
    }
}

TEST_CASE("pair sampling statistics") {
    SourceSpec spec;
    spec.tau_s = 1.7684e-9;

    SUBCASE("Poisson counting at R = 1e6/s for 1 s") {
        spec.pump_power_mw = std::sqrt(1e6 / spec.brightness_cal);
        REQUIRE(pair_rate(spec) == doctest::Approx(1e6).epsilon(1e-9));
        auto events = sample_pairs(spec, 1.0, 42);
        CHECK(std::fabs(static_cast<double>(events.size()) - 1e6) <= 4e3);
        for (std::size_t i = 1; i < events.size(); ++i)
            REQUIRE(events[i].t0_ps >= events[i - 1].t0_ps);
    }

    SUBCASE("relative delay is Laplace(tau): KS p > 0.01 at N = 1e5") {
        spec.pump_power_mw = std::sqrt(1e5 / spec.brightness_cal);
        auto events = sample_pairs(spec, 1.0, 77);
        REQUIRE(events.size() > 90000);
        std::vector<double> deltas;
        deltas.reserve(events.size());
        for (const auto& ev : events) deltas.push_back(ev.d_signal_ps - ev.d_idler_ps);
        const double d = oracle::ks_statistic_laplace(deltas, spec.tau_s * 1e12);
        CHECK(oracle::ks_p_value(d, deltas.size()) > 0.01);
    }

    SUBCASE("left/right decay constants of the relative delay agree within 5%") {
        spec.pump_power_mw = std::sqrt(1.2e6 / spec.brightness_cal);
        auto events = sample_pairs(spec, 1.0, 5150);
        REQUIRE(events.size() >= 1000000);
        const double tau_ps = spec.tau_s * 1e12;
        const double bin = tau_ps / 10.0;
        const int nbins = 40;
        std::vector<double> plus(nbins, 0.0), minus(nbins, 0.0);
        for (const auto& ev : events) {
            const double d = ev.d_signal_ps - ev.d_idler_ps;
            const int k = static_cast<int>(std::floor(std::fabs(d) / bin));
            if (k < nbins) (d >= 0.0 ? plus : minus)[k] += 1.0;
        }
        std::vector<double> xs, yp, ym;
        for (int k = 0; k < nbins; ++k) {
            REQUIRE(plus[k] > 0.0);
            REQUIRE(minus[k] > 0.0);
            xs.push_back((k + 0.5) * bin);
            yp.push_back(std::log(plus[k]));
            ym.push_back(std::log(minus[k]));
        }
        const double tau_plus = -1.0 / oracle::linear_regression(xs, yp).slope;
        const double tau_minus = -1.0 / oracle::linear_regression(xs, ym).slope;
        CHECK(std::fabs(tau_plus - tau_minus) / tau_minus < 0.05);
        CHECK(tau_plus == doctest::Approx(tau_ps).epsilon(0.05));
    }

    SUBCASE("identical seeds give identical event lists") {
        spec.pump_power_mw = 0.3;
        auto a = sample_pairs(spec, 0.01, 9);
        auto b = sample_pairs(spec, 0.01, 9);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].t0_ps == b[i].t0_ps);
            CHECK(a[i].d_signal_ps == b[i].d_signal_ps);
            CHECK(a[i].d_idler_ps == b[i].d_idler_ps);
        }
    }

    SUBCASE("gaussian-field mode bunches creation times") {
        spec.mode = SourceMode::gaussian_field;
        spec.pump_power_mw = std::sqrt(5e7 / spec.brightness_cal);
        const double duration_s = 0.02;
        auto events = sample_pairs(spec, duration_s, 21);
        REQUIRE(events.size() > 500000);
        // Fano factor of counts in windows of the intensity correlation time
        const double window_ps = spec.ou_corr_factor * spec.tau_s * 1e12;
        std::vector<double> counts(
            static_cast<std::size_t>(duration_s * 1e12 / window_ps) + 1, 0.0);
        for (const auto& ev : events)
            counts[static_cast<std::size_t>(ev.t0_ps / window_ps)] += 1.0;
        double mean = 0.0;
        for (double c : counts) mean += c;
        mean /= static_cast<double>(counts.size());
        double var = 0.0;
        for (double c : counts) var += (c - mean) * (c - mean);
        var /= static_cast<double>(counts.size() - 1);
        CHECK(var / mean > 1.5);  // far above the Poisson value 1
    }

    SUBCASE("degenerate duration is rejected") {
        CHECK_THROWS_AS(sample_pairs(spec, 0.0, 1), std::invalid_argument);
    }
}
