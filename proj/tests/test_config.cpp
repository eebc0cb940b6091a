#include <stdexcept>
#include <cstdlib>

#include "biphoton/config.hpp"
#include "biphoton/pipeline.hpp"
#include "doctest.h"

using namespace biphoton;

namespace {

const char* kMinimalConfig = R"({
  "source": {"pump_power_mw": 0.5, "tau_ns": 1.77},
  "run": {"duration_s": 0.01, "seed": 42}
})";

}  // namespace

TEST_CASE("minimal config parses with derivations") {
    auto cfg = config_from_json_text(kMinimalConfig);
    CHECK(cfg.source.pump_power_mw == 0.5);
    CHECK(cfg.source.tau_s == doctest::Approx(1.77e-9));
    CHECK(cfg.source.q_loaded == doctest::Approx(cfg.resonator.q_loaded()));
    CHECK(cfg.source.ring_length_m == doctest::Approx(cfg.resonator.ring_length_m()));
    CHECK(cfg.run.seed == 42);
}

TEST_CASE("tau defaults to the loaded-Q linewidth when not given") {
    auto cfg = config_from_json_text(R"({"run": {"seed": 7}})");
    const double dnu = cfg.resonator.pump_frequency_hz() / cfg.resonator.q_loaded();
    CHECK(cfg.source.tau_s == doctest::Approx(bandwidth_hz_to_tau_s(dnu)));
}

TEST_CASE("seed is mandatory") {
    CHECK_THROWS_AS(config_from_json_text(R"({"run": {"duration_s": 1.0}})"),
                    std::invalid_argument);
}

TEST_CASE("unknown keys are rejected") {
    CHECK_THROWS_AS(config_from_json_text(R"({"sorce": {}, "run": {"seed": 1}})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        config_from_json_text(R"({"source": {"pump_mw": 1}, "run": {"seed": 1}})"),
        std::invalid_argument);
}

TEST_CASE("round-trip through serialization preserves the config") {
    auto cfg = config_from_json_text(kMinimalConfig);
    auto text = config_to_json_text(cfg);
    auto back = config_from_json_text(text);
    CHECK(back.source.pump_power_mw == cfg.source.pump_power_mw);
    CHECK(back.source.tau_s == doctest::Approx(cfg.source.tau_s));
    CHECK(back.run.seed == cfg.run.seed);
    CHECK(back.det_signal.efficiency == cfg.det_signal.efficiency);
}

TEST_CASE("BIPHOTON_SEED overrides the config seed") {
    setenv("BIPHOTON_SEED", "4242", 1);
    auto cfg = config_from_json_text(kMinimalConfig);
    unsetenv("BIPHOTON_SEED");
    CHECK(cfg.run.seed == 4242);
}

TEST_CASE("all shipped presets load and validate") {
    setenv("BIPHOTON_PRESET_DIR", BIPHOTON_TEST_PRESET_DIR, 1);
    for (const char* name : {"fig2a", "fig2b", "fig2c", "fig2d", "fig3", "fig4",
                             "fig5-ideal", "fig5-paper"}) {
        CAPTURE(name);
        auto cfg = load_preset(name);
        CHECK_NOTHROW(cfg.validate());
    }
    // the entanglement presets carry a franson section
    CHECK(load_preset("fig5-ideal").franson.has_value());
    CHECK(load_preset("fig5-paper").franson.has_value());
    unsetenv("BIPHOTON_PRESET_DIR");
}

TEST_CASE("simulated streams are deterministic and sized by the rate") {
    auto cfg = config_from_json_text(R"({
      "resonator": {"q_intrinsic": 8e6, "q_coupling": 2666666.6666666665},
      "source": {"pump_power_mw": 0.50709255283711, "tau_ns": 1.77},
      "detectors": {
        "signal": {"efficiency": 1.0, "path_loss_db": 0.0, "jitter_sigma_ps": 0.0,
                    "dark_prob_per_ns": 0.0, "dead_time_ns": 0.0},
        "idler":  {"efficiency": 1.0, "path_loss_db": 0.0, "jitter_sigma_ps": 0.0,
                    "dark_prob_per_ns": 0.0, "dead_time_ns": 0.0}
      },
      "run": {"duration_s": 1.0, "seed": 99}
    })");
    // power chosen so R = 1e6/s
    REQUIRE(pair_rate(cfg.source) == doctest::Approx(1e6).epsilon(1e-4));
    auto a = simulate_streams(cfg);
    CHECK(std::fabs(static_cast<double>(a.signal.records.size()) - 1e6) <= 4e3);
    CHECK(std::fabs(static_cast<double>(a.idler.records.size()) - 1e6) <= 4e3);
    CHECK_NOTHROW(a.signal.validate());
    CHECK_NOTHROW(a.idler.validate());
    auto b = simulate_streams(cfg);
    CHECK(a.signal == b.signal);
    CHECK(a.idler == b.idler);
}
