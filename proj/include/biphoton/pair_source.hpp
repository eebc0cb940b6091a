#pragma once

// Stochastic model of cavity-enhanced SFWM pair generation.
//
// Pair creation times follow either a homogeneous Poisson process
// (poisson-pairs) or a Cox process driven by the squared modulus of a complex
// Ornstein-Uhlenbeck field (gaussian-field), which adds the thermal bunching
// seen in the signal autocorrelation.  Each photon then gets an independent
// exponential cavity-decay delay, so the signal-idler delay difference is
// Laplace(tau) -- the double-exponential cross-correlation peak.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "biphoton/rng.hpp"
#include "biphoton/units.hpp"

namespace biphoton {

enum class SourceMode { poisson_pairs, gaussian_field };

struct SourceSpec {
    double gamma_per_w_m = 1.0;        // effective nonlinearity
    double pump_power_mw = 1.0;
    double q_loaded = 2e6;
    double ring_length_m = 2.0 * kPi * 115e-6;
    double tau_s = 1.7684e-9;          // biphoton 1/e correlation time
    double tau_signal_s = 0.0;         // 0 -> tau_s
    double tau_idler_s = 0.0;          // 0 -> tau_s
    double brightness_cal = 3.5e7 / 9.0;  // s^-1 mW^-2 at the reference point
    SourceMode mode = SourceMode::poisson_pairs;
    // Correlation time of the Cox intensity, in units of tau_s.  Kept well
    // above 1 so the per-photon decay delays do not wash out the zero-delay
    // bunching of the emitted stream (see docs/README on the thermal model).
    double ou_corr_factor = 50.0;

    static constexpr double kQRef = 2e6;
    static constexpr double kGammaRef = 1.0;
    static constexpr double kRingLengthRef = 2.0 * kPi * 115e-6;

    double tau_signal() const { return tau_signal_s > 0.0 ? tau_signal_s : tau_s; }
    double tau_idler() const { return tau_idler_s > 0.0 ? tau_idler_s : tau_s; }

    void validate() const;  // throws std::invalid_argument
};

struct PairEvent {
    double t0_ps = 0.0;        // creation time
    double d_signal_ps = 0.0;  // cavity-decay delay, >= 0
    double d_idler_ps = 0.0;

    double signal_emission_ps() const { return t0_ps + d_signal_ps; }
    double idler_emission_ps() const { return t0_ps + d_idler_ps; }
};

// R = brightness_cal * P^2 * (Q/Qref)^3 * (gamma/gamma_ref)^2 * (Lref/L)^2.
double pair_rate(const SourceSpec& spec);

// Pairs per temporal mode (duration 2*tau) per mW^2.
double modal_brightness(double brightness_cal, double bandwidth_hz);

// Mean pair number in one temporal mode, mu = R * 2 tau.
double mean_pairs_per_mode(const SourceSpec& spec);

// Probability that a temporal mode holds >= 2 pairs: Poisson occupation in
// poisson-pairs mode, Bose-Einstein (geometric) in gaussian-field mode.
double multipair_fraction(const SourceSpec& spec);

// Streaming generator; events come out sorted by t0.
class PairGenerator {
public:
    PairGenerator(const SourceSpec& spec, double duration_s, std::uint64_t seed);
    bool next(PairEvent& event);

private:
    bool next_creation_time(double& t0_ps);
    void refill_cell_buffer();

    SourceSpec spec_;
    double duration_ps_;
    double rate_per_ps_;
    double tau_signal_ps_;
    double tau_idler_ps_;
    Rng rng_;
    // poisson-pairs state
    double t_ps_ = 0.0;
    // gaussian-field state
    double cell_dt_ps_ = 0.0;
    double ou_rho_ = 0.0;
    double ou_sigma_step_ = 0.0;
    double alpha_re_ = 0.0, alpha_im_ = 0.0;
    double cell_start_ps_ = 0.0;
    std::vector<double> cell_events_;
    std::size_t cell_cursor_ = 0;
    bool exhausted_ = false;
};

std::vector<PairEvent> sample_pairs(const SourceSpec& spec, double duration_s, std::uint64_t seed);

// Debug CSV: t0_ps,d_signal_ps,d_idler_ps.
void write_pairs_csv(std::span<const PairEvent> pairs, std::ostream& os);

}  // namespace biphoton
