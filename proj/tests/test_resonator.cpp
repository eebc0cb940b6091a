#include <stdexcept>
#include <cmath>
#include <random>

#include "biphoton/resonator.hpp"
#include "doctest.h"

using namespace biphoton;

TEST_CASE("resonance grid geometry") {
    ResonatorSpec spec;  // defaults: 1551.7 nm pump, 200 GHz FSR
    auto lines = resonance_grid(spec, 2);
    REQUIRE(lines.size() == 5);

    SUBCASE("signal and idler 2 FSR from the pump land at 1548.5 / 1554.9 nm") {
        const auto& signal = lines[4];  // m = +2
        const auto& idler = lines[0];   // m = -2
        CHECK(signal.mode_index == 2);
        CHECK(idler.mode_index == -2);
        CHECK(signal.center_wavelength_nm() == doctest::Approx(1548.5).epsilon(5e-5));
        CHECK(idler.center_wavelength_nm() == doctest::Approx(1554.9).epsilon(5e-5));
    }

    SUBCASE("zero-order line is exactly the pump frequency") {
        auto one = resonance_grid(spec, 1);
        CHECK(one[1].mode_index == 0);
        CHECK(one[1].center_hz == spec.pump_frequency_hz());
    }

    SUBCASE("grid spacing is exactly the FSR") {
        CHECK(lines[4].center_hz - lines[3].center_hz == doctest::Approx(200e9).epsilon(1e-12));
    }

    SUBCASE("energy matching: nu(+m) + nu(-m) = 2 nu_p") {
        const double two_nu_p = 2.0 * spec.pump_frequency_hz();
        for (int m = 1; m <= 2; ++m) {
            const double sum = lines[2 + m].center_hz + lines[2 - m].center_hz;
            CHECK(std::fabs(sum - two_nu_p) <= 1e-9 * two_nu_p);
        }
    }

    SUBCASE("invalid specs are rejected") {
        ResonatorSpec bad = spec;
        bad.fsr_hz = 0.0;
        CHECK_THROWS_AS(resonance_grid(bad, 2), std::invalid_argument);
        CHECK_THROWS_AS(resonance_grid(spec, 0), std::invalid_argument);
    }
}

TEST_CASE("lorentzian transmission dip") {
    ResonanceLine line{193.2e12, 90e6, 0};

    SUBCASE("critical coupling extinguishes on resonance") {
        CHECK(lorentzian_transmission(line, 1.0, line.center_hz) == doctest::Approx(0.0));
    }

    SUBCASE("far off resonance the ring is transparent") {
        CHECK(lorentzian_transmission(line, 2.0, line.center_hz + 1e12) ==
              doctest::Approx(1.0).epsilon(1e-8));
    }

    SUBCASE("half-width point sits at half the dip depth") {
        const double t_min = lorentzian_min_transmission(3.0);
        const double dip_on = 1.0 - lorentzian_transmission(line, 3.0, line.center_hz);
        const double dip_hw =
            1.0 - lorentzian_transmission(line, 3.0, line.center_hz + line.fwhm_hz / 2.0);
        CHECK(dip_on == doctest::Approx(1.0 - t_min));
        CHECK(dip_hw == doctest::Approx(dip_on / 2.0));
    }

    SUBCASE("transmission stays within [0,1] and is symmetric") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> detuning(-1e10, 1e10);
        std::uniform_real_distribution<double> ratio(0.05, 20.0);
        for (int i = 0; i < 2000; ++i) {
            const double d = detuning(rng);
            const double r = ratio(rng);
            const double t_plus = lorentzian_transmission(line, r, line.center_hz + d);
            const double t_minus = lorentzian_transmission(line, r, line.center_hz - d);
            CHECK(t_plus >= 0.0);
            CHECK(t_plus <= 1.0);
            CHECK(t_plus == doctest::Approx(t_minus).epsilon(1e-12));
        }
    }
}

TEST_CASE("bandwidth from loaded Q") {
    CHECK(bandwidth_from_q(193.4e12, 2e6) == doctest::Approx(193.4e12 / 2e6));
    CHECK(193.4e12 / 2e6 == doctest::Approx(96.7e6).epsilon(1e-3));
    // also consistent with a 90 MHz device at the 10% level
    CHECK(std::fabs(bandwidth_from_q(193.4e12, 2e6) - 90e6) / 90e6 < 0.10);

    SUBCASE("reciprocal scaling in Q") {
        CHECK(bandwidth_from_q(193.4e12, 4e6) ==
              doctest::Approx(bandwidth_from_q(193.4e12, 2e6) / 2.0));
    }

    SUBCASE("intrinsic Q of 7e7 reaches the sub-10-MHz regime") {
        const double dnu = bandwidth_from_q(193.4e12, 7e7);
        CHECK(dnu == doctest::Approx(2.763e6).epsilon(1e-3));
        CHECK(dnu < 10e6);
    }

    SUBCASE("coupling always broadens the loaded linewidth") {
        ResonatorSpec spec;
        spec.q_intrinsic = 7e7;
        for (double qc : {1e5, 1e6, 1e7, 1e9}) {
            spec.q_coupling = qc;
            CHECK(bandwidth_from_q(193.4e12, spec.q_loaded()) >=
                  bandwidth_from_q(193.4e12, spec.q_intrinsic));
        }
    }
}

TEST_CASE("thermo-optic tuning") {
    ResonatorSpec spec;

    CHECK(thermal_shift_pm(spec, 1.0) == doctest::Approx(21.90));
    CHECK(thermal_shift_pm(spec, 0.0) == 0.0);

    SUBCASE("14 K sweep covers the ~300 pm range") {
        const double shift = thermal_shift_pm(spec, 14.0);
        CHECK(shift == doctest::Approx(306.6));
        CHECK(std::fabs(shift - 300.0) <= 10.0);
    }

    SUBCASE("shift is a rigid translation in wavelength") {
        auto lines = resonance_grid(spec, 3);
        const double shift = thermal_shift_pm(spec, 14.0);
        std::vector<ResonanceLine> moved;
        for (const auto& line : lines) moved.push_back(shifted_line(line, shift));
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const double before =
                lines[i].center_wavelength_nm() - lines[i - 1].center_wavelength_nm();
            const double after =
                moved[i].center_wavelength_nm() - moved[i - 1].center_wavelength_nm();
            CHECK(std::fabs(after - before) <= 1e-12 * std::fabs(before));
        }
    }
}

TEST_CASE("transmission scan synthesis") {
    ResonatorSpec spec;
    spec.q_intrinsic = 8e6;
    spec.q_coupling = 8e6 / 3.0;  // deep dip
    auto lines = resonance_grid(spec, 2);
    const auto& line = lines[4];
    const double span = 8.0 * line.fwhm_hz;
    const double start = line.center_hz - span / 2.0;
    const double stop = line.center_hz + span / 2.0;
    const double step = span / 2000.0;

    SUBCASE("noiseless scan equals the model pointwise") {
        auto scan = transmission_scan(spec, line, start, stop, step, 0.0, 99);
        for (std::size_t i = 0; i < scan.freq_hz.size(); ++i) {
            const double model =
                lorentzian_transmission(line, spec.coupling_ratio(), scan.freq_hz[i]);
            CHECK(scan.transmission[i] == doctest::Approx(model).epsilon(1e-12));
        }
    }

    SUBCASE("noise has the configured RMS") {
        const double step_fine = span / 9999.0;
        auto scan = transmission_scan(spec, line, start, stop, step_fine, 0.01, 99);
        REQUIRE(scan.freq_hz.size() >= 10000);
        double ss = 0.0;
        for (std::size_t i = 0; i < scan.freq_hz.size(); ++i) {
            const double model =
                lorentzian_transmission(line, spec.coupling_ratio(), scan.freq_hz[i]);
            const double d = scan.transmission[i] - model;
            ss += d * d;
        }
        const double rms = std::sqrt(ss / static_cast<double>(scan.freq_hz.size()));
        CHECK(rms == doctest::Approx(0.01).epsilon(0.10));
    }

    SUBCASE("same seed reproduces the identical table") {
        auto a = transmission_scan(spec, line, start, stop, step, 0.02, 1234);
        auto b = transmission_scan(spec, line, start, stop, step, 0.02, 1234);
        CHECK(a.freq_hz == b.freq_hz);
        CHECK(a.transmission == b.transmission);
    }

    SUBCASE("empty range is rejected") {
        CHECK_THROWS_AS(transmission_scan(spec, line, stop, start, step, 0.0, 1),
                        std::invalid_argument);
    }
}
