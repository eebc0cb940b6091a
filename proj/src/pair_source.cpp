#include "biphoton/pair_source.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace biphoton {

void SourceSpec::validate() const {
    if (!(tau_s > 0.0))
        throw std::invalid_argument("source: tau must be positive");
    if (tau_signal_s < 0.0 || tau_idler_s < 0.0)
        throw std::invalid_argument("source: per-photon tau must be >= 0");
    if (pump_power_mw < 0.0)
        throw std::invalid_argument("source: pump power must be >= 0");
    if (!(brightness_cal > 0.0))
        throw std::invalid_argument("source: brightness calibration must be positive");
    if (!(q_loaded > 0.0))
        throw std::invalid_argument("source: loaded Q must be positive");
    if (!(ring_length_m > 0.0))
        throw std::invalid_argument("source: ring length must be positive");
    if (!(ou_corr_factor > 0.0))
        throw std::invalid_argument("source: OU correlation factor must be positive");
}

double pair_rate(const SourceSpec& spec) {
    spec.validate();
    const double q_ratio = spec.q_loaded / SourceSpec::kQRef;
    const double gamma_ratio = spec.gamma_per_w_m / SourceSpec::kGammaRef;
    const double length_ratio = SourceSpec::kRingLengthRef / spec.ring_length_m;
    return spec.brightness_cal * spec.pump_power_mw * spec.pump_power_mw *
           q_ratio * q_ratio * q_ratio * gamma_ratio * gamma_ratio *
           length_ratio * length_ratio;
}

double modal_brightness(double brightness_cal, double bandwidth_hz) {
    if (!(bandwidth_hz > 0.0))
        throw std::invalid_argument("modal_brightness: bandwidth must be positive");
    return brightness_cal * 2.0 * bandwidth_hz_to_tau_s(bandwidth_hz);
}

double mean_pairs_per_mode(const SourceSpec& spec) {
    return pair_rate(spec) * 2.0 * spec.tau_s;
}

double multipair_fraction(const SourceSpec& spec) {
    const double mu = mean_pairs_per_mode(spec);
    if (mu <= 0.0) return 0.0;
    if (spec.mode == SourceMode::poisson_pairs) {
        return 1.0 - std::exp(-mu) * (1.0 + mu);
    }
    // Bose-Einstein occupation: P(n) = mu^n / (1+mu)^(n+1).
    const double r = mu / (1.0 + mu);
    return r * r;
}

PairGenerator::PairGenerator(const SourceSpec& spec, double duration_s, std::uint64_t seed)
    : spec_(spec),
      duration_ps_(duration_s * 1e12),
      rate_per_ps_(pair_rate(spec) * 1e-12),
      tau_signal_ps_(spec.tau_signal() * 1e12),
      tau_idler_ps_(spec.tau_idler() * 1e12),
      rng_(derive_seed(seed, SeedStage::pairs)) {
    if (!(duration_s > 0.0))
        throw std::invalid_argument("sample_pairs: duration must be positive");
    if (spec_.mode == SourceMode::gaussian_field) {
        const double tau_corr_ps = spec_.ou_corr_factor * spec_.tau_s * 1e12;
        cell_dt_ps_ = tau_corr_ps / 20.0;
        ou_rho_ = std::exp(-cell_dt_ps_ / tau_corr_ps);
        ou_sigma_step_ = std::sqrt((1.0 - ou_rho_ * ou_rho_) * 0.5);
        double g0, g1;
        rng_.gaussian_pair(g0, g1);
        alpha_re_ = g0 * std::sqrt(0.5);
        alpha_im_ = g1 * std::sqrt(0.5);
        cell_start_ps_ = 0.0;
        refill_cell_buffer();
    }
}

void PairGenerator::refill_cell_buffer() {
    cell_events_.clear();
    cell_cursor_ = 0;
    while (cell_start_ps_ < duration_ps_) {
        const double dt = std::min(cell_dt_ps_, duration_ps_ - cell_start_ps_);
        const double intensity = alpha_re_ * alpha_re_ + alpha_im_ * alpha_im_;
        const std::uint64_t n = rng_.poisson(rate_per_ps_ * intensity * dt);
        for (std::uint64_t k = 0; k < n; ++k)
            cell_events_.push_back(cell_start_ps_ + dt * rng_.uniform());
        cell_start_ps_ += dt;
        double g0, g1;
        rng_.gaussian_pair(g0, g1);
        alpha_re_ = alpha_re_ * ou_rho_ + ou_sigma_step_ * g0;
        alpha_im_ = alpha_im_ * ou_rho_ + ou_sigma_step_ * g1;
        if (!cell_events_.empty()) {
            std::sort(cell_events_.begin(), cell_events_.end());
            return;
        }
    }
    exhausted_ = true;
}

bool PairGenerator::next_creation_time(double& t0_ps) {
    if (spec_.mode == SourceMode::poisson_pairs) {
        if (rate_per_ps_ <= 0.0) return false;
        t_ps_ += rng_.exponential(1.0 / rate_per_ps_);
        if (t_ps_ >= duration_ps_) return false;
        t0_ps = t_ps_;
        return true;
    }
    if (cell_cursor_ >= cell_events_.size() && !exhausted_) refill_cell_buffer();
    if (exhausted_ || cell_cursor_ >= cell_events_.size()) return false;
    t0_ps = cell_events_[cell_cursor_++];
    return true;
}

bool PairGenerator::next(PairEvent& event) {
    double t0;
    if (!next_creation_time(t0)) return false;
    event.t0_ps = t0;
    event.d_signal_ps = rng_.exponential(tau_signal_ps_);
    event.d_idler_ps = rng_.exponential(tau_idler_ps_);
    return true;
}

std::vector<PairEvent> sample_pairs(const SourceSpec& spec, double duration_s, std::uint64_t seed) {
    PairGenerator gen(spec, duration_s, seed);
    std::vector<PairEvent> events;
    const double expected = pair_rate(spec) * duration_s;
    events.reserve(static_cast<std::size_t>(expected + 4.0 * std::sqrt(expected + 1.0)) + 16);
    PairEvent ev;
    while (gen.next(ev)) events.push_back(ev);
    return events;
}

void write_pairs_csv(std::span<const PairEvent> pairs, std::ostream& os) {
    os << "t0_ps,d_signal_ps,d_idler_ps\n";
    char buf[120];
    for (const auto& p : pairs) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g\n",
                      p.t0_ps, p.d_signal_ps, p.d_idler_ps);
        os << buf;
    }
}

}  // namespace biphoton
