#pragma once

// Measurement-chain model turning ideal emission times into detector
// time tags.  Fixed stage order:
//   1. Bernoulli thinning with p = efficiency * 10^(-path_loss/10)
//   2. Gaussian timing jitter
//   3. dark counts (Poisson, flagged)
//   4. gate windows
//   5. dead time (non-paralyzable)
//   6. quantization to the time-tagger tick
//
// Thinning happens first so high-rate simulations can feed emissions in
// chunks; the remaining stages run once over the survivors.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "biphoton/rng.hpp"
#include "biphoton/tagstream.hpp"

namespace biphoton {

struct GateSpec {
    double period_ns = 10.0;
    double width_ns = 1.0;
};

struct DetectorSpec {
    double efficiency = 0.15;
    double path_loss_db = 6.5;             // filtering + chip out-coupling
    double jitter_sigma_ps = 247.4873734152916;  // 350 ps combined / sqrt(2)
    double dark_prob_per_ns = 1e-4;
    std::optional<GateSpec> gate;           // nullopt = free-running
    double dead_time_ns = 1000.0;
    std::uint64_t tick_ps = 84;

    double survival_probability() const {
        return efficiency * loss_db_to_transmission(path_loss_db);
    }

    void validate() const;  // throws std::invalid_argument
};

// Combined (pairwise) jitter of two detectors: sqrt(sa^2 + sb^2).
double pairwise_jitter_ps(const DetectorSpec& a, const DetectorSpec& b);

// Incremental front-end for chunked simulation: add_emissions() applies the
// thinning stage as chunks arrive, finalize() runs the remaining stages.
class DetectionPipeline {
public:
    DetectionPipeline(const DetectorSpec& spec, std::uint16_t channel,
                      double duration_ps, std::uint64_t seed);

    void add_emissions(std::span<const double> emissions_ps);
    TagStream finalize();

private:
    DetectorSpec spec_;
    std::uint16_t channel_;
    double duration_ps_;
    double survival_p_;
    Rng rng_;
    std::vector<double> survivors_ps_;
    bool finalized_ = false;
};

// Whole-list contract: emissions must be sorted ascending and lie within
// [0, duration_ps].
TagStream detect(std::span<const double> emissions_ps, const DetectorSpec& spec,
                 std::uint16_t channel, double duration_ps, std::uint64_t seed);

}  // namespace biphoton
