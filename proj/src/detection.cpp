#include "biphoton/detection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace biphoton {

void DetectorSpec::validate() const {
    if (!(efficiency >= 0.0 && efficiency <= 1.0))
        throw std::invalid_argument("detector: efficiency must be in [0,1]");
    if (path_loss_db < 0.0)
        throw std::invalid_argument("detector: path loss must be >= 0 dB");
    if (jitter_sigma_ps < 0.0)
        throw std::invalid_argument("detector: jitter sigma must be >= 0");
    if (dark_prob_per_ns < 0.0)
        throw std::invalid_argument("detector: dark probability must be >= 0");
    if (tick_ps == 0)
        throw std::invalid_argument("detector: tick must be nonzero");
    if (dead_time_ns < 0.0)
        throw std::invalid_argument("detector: dead time must be >= 0");
    if (gate && !(gate->width_ns > 0.0 && gate->period_ns > 0.0 &&
                  gate->width_ns <= gate->period_ns))
        throw std::invalid_argument("detector: gate width must be in (0, period]");
}

double pairwise_jitter_ps(const DetectorSpec& a, const DetectorSpec& b) {
    return std::hypot(a.jitter_sigma_ps, b.jitter_sigma_ps);
}

DetectionPipeline::DetectionPipeline(const DetectorSpec& spec, std::uint16_t channel,
                                     double duration_ps, std::uint64_t seed)
    : spec_(spec),
      channel_(channel),
      duration_ps_(duration_ps),
      survival_p_(spec.survival_probability()),
      rng_(seed) {
    spec_.validate();
    if (!(duration_ps > 0.0))
        throw std::invalid_argument("detect: duration must be positive");
}

void DetectionPipeline::add_emissions(std::span<const double> emissions_ps) {
    for (double t : emissions_ps)
        if (rng_.uniform() < survival_p_) survivors_ps_.push_back(t);
}

TagStream DetectionPipeline::finalize() {
    if (finalized_) throw std::logic_error("DetectionPipeline::finalize called twice");
    finalized_ = true;

    struct Raw {
        double t;
        std::uint32_t order;
        bool dark;
    };
    std::vector<Raw> raw;
    raw.reserve(survivors_ps_.size() + 64);

    // stage 2: jitter
    if (spec_.jitter_sigma_ps > 0.0) {
        for (std::size_t i = 0; i < survivors_ps_.size(); ++i)
            raw.push_back({survivors_ps_[i] + spec_.jitter_sigma_ps * rng_.gaussian(),
                           static_cast<std::uint32_t>(i), false});
    } else {
        for (std::size_t i = 0; i < survivors_ps_.size(); ++i)
            raw.push_back({survivors_ps_[i], static_cast<std::uint32_t>(i), false});
    }
    survivors_ps_.clear();

    // stage 3: dark counts across the acquisition; gate filtering below
    // restricts them to the gate windows.
    if (spec_.dark_prob_per_ns > 0.0) {
        const double mean_gap_ps = 1000.0 / spec_.dark_prob_per_ns;
        double t = rng_.exponential(mean_gap_ps);
        std::uint32_t order = static_cast<std::uint32_t>(raw.size());
        while (t < duration_ps_) {
            raw.push_back({t, order++, true});
            t += rng_.exponential(mean_gap_ps);
        }
    }

    std::sort(raw.begin(), raw.end(), [](const Raw& a, const Raw& b) {
        if (a.t != b.t) return a.t < b.t;
        return a.order < b.order;
    });

    // stages 4-6: gates, dead time, quantization
    const bool gated = spec_.gate.has_value();
    const double period_ps = gated ? spec_.gate->period_ns * 1e3 : 0.0;
    const double width_ps = gated ? spec_.gate->width_ns * 1e3 : 0.0;
    const double dead_ps = spec_.dead_time_ns * 1e3;
    const double tick = static_cast<double>(spec_.tick_ps);

    TagStream stream;
    stream.header.tick_ps = spec_.tick_ps;
    stream.header.duration_ps =
        ((static_cast<std::uint64_t>(duration_ps_) + spec_.tick_ps - 1) / spec_.tick_ps) *
        spec_.tick_ps;
    stream.header.channel_count = static_cast<std::uint16_t>(channel_ + 1);

    double last_accepted = -1.0;
    bool any_accepted = false;
    for (const Raw& r : raw) {
        if (r.t < 0.0 || r.t > duration_ps_) continue;
        if (gated && std::fmod(r.t, period_ps) >= width_ps) continue;
        if (any_accepted && dead_ps > 0.0 && r.t < last_accepted + dead_ps) continue;
        last_accepted = r.t;
        any_accepted = true;
        TimeTag tag;
        tag.time_ps = static_cast<std::uint64_t>(std::llround(r.t / tick)) * spec_.tick_ps;
        tag.channel = channel_;
        tag.flags = r.dark ? kTagFlagDark : 0;
        stream.records.push_back(tag);
    }
    return stream;
}

TagStream detect(std::span<const double> emissions_ps, const DetectorSpec& spec,
                 std::uint16_t channel, double duration_ps, std::uint64_t seed) {
    for (std::size_t i = 1; i < emissions_ps.size(); ++i)
        if (emissions_ps[i] < emissions_ps[i - 1])
            throw std::invalid_argument("detect: emissions must be sorted ascending");
    DetectionPipeline pipeline(spec, channel, duration_ps, seed);
    pipeline.add_emissions(emissions_ps);
    return pipeline.finalize();
}

}  // namespace biphoton
