#include "biphoton/franson.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "biphoton/correlation.hpp"

namespace biphoton {

void FransonSpec::validate(double source_tau_s) const {
    if (!(delta_t_ns > 0.0))
        throw std::invalid_argument("franson: delta_t must be positive");
    if (delta_t_ns * 1e-9 < 10.0 * source_tau_s)
        throw std::invalid_argument(
            "franson: delta_t below 10*tau, coincidence peaks would overlap");
    for (double r : splitter_ratios)
        if (!(r > 0.0 && r < 1.0))
            throw std::invalid_argument("franson: splitter ratios must be in (0,1)");
    if (phase_noise_sigma_rad < 0.0)
        throw std::invalid_argument("franson: phase noise sigma must be >= 0");
    if (long_arm_excess_loss_db < 0.0)
        throw std::invalid_argument("franson: long-arm excess loss must be >= 0 dB");
}

void EntangledStateModel::validate() const {
    if (!(visibility_intrinsic >= 0.0 && visibility_intrinsic <= 1.0))
        throw std::invalid_argument("franson: intrinsic visibility must be in [0,1]");
}

PathProbabilities path_probabilities(const FransonSpec& spec) {
    const double g = loss_db_to_transmission(spec.long_arm_excess_loss_db);
    PathProbabilities p;
    p.p_short_signal = (1.0 - spec.splitter_ratios[0]) * (1.0 - spec.splitter_ratios[1]);
    p.p_long_signal = spec.splitter_ratios[0] * spec.splitter_ratios[1] * g;
    p.p_short_idler = (1.0 - spec.splitter_ratios[2]) * (1.0 - spec.splitter_ratios[3]);
    p.p_long_idler = spec.splitter_ratios[2] * spec.splitter_ratios[3] * g;
    p.p_ss = p.p_short_signal * p.p_short_idler;
    p.p_ll = p.p_long_signal * p.p_long_idler;
    p.p_sl = p.p_short_signal * p.p_long_idler;
    p.p_ls = p.p_long_signal * p.p_short_idler;
    p.splitter_penalty =
        p.p_ss + p.p_ll > 0.0 ? 2.0 * std::sqrt(p.p_ss * p.p_ll) / (p.p_ss + p.p_ll) : 0.0;
    return p;
}

RoutedPairs route_pairs(std::span<const PairEvent> pairs, const FransonSpec& spec,
                        const EntangledStateModel& state, double source_tau_s,
                        std::uint64_t seed) {
    spec.validate(source_tau_s);
    state.validate();

    const PathProbabilities p = path_probabilities(spec);
    const double cross = 2.0 * std::sqrt(p.p_ss * p.p_ll) * state.visibility_intrinsic;
    const double sector = p.p_ss + p.p_ll;
    // The middle-peak probability peaks at sector+cross; the complement must
    // fit inside the single-photon monitored-port budget on both sides.
    if (p.monitored_signal() < sector + cross + p.p_sl + p.p_ls - 1e-12 ||
        p.monitored_idler() < sector + cross + p.p_sl + p.p_ls - 1e-12 ||
        p.monitored_signal() + p.monitored_idler() - (sector - cross) - p.p_sl - p.p_ls >
            1.0 + 1e-12)
        throw std::invalid_argument("franson: splitter configuration leaves no room for "
                                    "phase-flat singles");

    const double delta_t_ps = spec.delta_t_ns * 1e3;
    const double phase0 = spec.phi1 + spec.phi2;
    const double ll_given_mid = sector > 0.0 ? p.p_ll / sector : 0.0;
    const double long_given_signal =
        p.monitored_signal() > 0.0 ? p.p_long_signal / p.monitored_signal() : 0.0;
    const double long_given_idler =
        p.monitored_idler() > 0.0 ? p.p_long_idler / p.monitored_idler() : 0.0;

    Rng rng(derive_seed(seed, SeedStage::franson_route));
    RoutedPairs out;
    out.signal_ps.reserve(pairs.size() / 2);
    out.idler_ps.reserve(pairs.size() / 2);

    for (const PairEvent& ev : pairs) {
        double phi = phase0;
        if (spec.phase_noise_sigma_rad > 0.0)
            phi += spec.phase_noise_sigma_rad * rng.gaussian();
        const double p_mid = sector + cross * std::cos(phi);

        const double es = ev.signal_emission_ps();
        const double ei = ev.idler_emission_ps();
        double u = rng.uniform();

        if (u < p_mid) {
            if (rng.uniform() < ll_given_mid) {
                out.signal_ps.push_back(es + delta_t_ps);
                out.idler_ps.push_back(ei + delta_t_ps);
            } else {
                out.signal_ps.push_back(es);
                out.idler_ps.push_back(ei);
            }
            continue;
        }
        u -= p_mid;
        if (u < p.p_sl) {
            out.signal_ps.push_back(es);
            out.idler_ps.push_back(ei + delta_t_ps);
            continue;
        }
        u -= p.p_sl;
        if (u < p.p_ls) {
            out.signal_ps.push_back(es + delta_t_ps);
            out.idler_ps.push_back(ei);
            continue;
        }
        u -= p.p_ls;
        const double signal_only = p.monitored_signal() - p_mid - p.p_sl - p.p_ls;
        if (u < signal_only) {
            const bool long_path = rng.uniform() < long_given_signal;
            out.signal_ps.push_back(es + (long_path ? delta_t_ps : 0.0));
            continue;
        }
        u -= signal_only;
        const double idler_only = p.monitored_idler() - p_mid - p.p_sl - p.p_ls;
        if (u < idler_only) {
            const bool long_path = rng.uniform() < long_given_idler;
            out.idler_ps.push_back(ei + (long_path ? delta_t_ps : 0.0));
        }
        // otherwise both photons left through unmonitored ports
    }

    std::sort(out.signal_ps.begin(), out.signal_ps.end());
    std::sort(out.idler_ps.begin(), out.idler_ps.end());
    return out;
}

std::vector<double> FringeScanResult::phases() const {
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& pt : points) v.push_back(pt.phase_rad);
    return v;
}

std::vector<double> FringeScanResult::corrected_counts() const {
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& pt : points) v.push_back(pt.middle_corrected);
    return v;
}

FringeScanResult fringe_scan(const SourceSpec& source, const DetectorSpec& det_signal,
                             const DetectorSpec& det_idler, const FransonSpec& franson,
                             const EntangledStateModel& state,
                             std::span<const double> phases_rad,
                             double per_point_duration_s, std::uint64_t seed) {
    if (phases_rad.size() < 6)
        throw std::invalid_argument("fringe_scan: need at least 6 phase points");
    franson.validate(source.tau_s);
    state.validate();

    FringeScanResult result;
    result.delta_t_ps = franson.delta_t_ns * 1e3;
    result.window_ps = result.delta_t_ps;  // |dt| <= dT/2
    result.per_point_duration_s = per_point_duration_s;
    const double duration_ps = per_point_duration_s * 1e12;

    // Photons delayed into the long arm may land past the nominal end; give
    // the detectors headroom so those tags are kept.
    const double duration_with_tail_ps = duration_ps + 4.0 * result.delta_t_ps;

    for (std::size_t i = 0; i < phases_rad.size(); ++i) {
        const std::uint64_t point_seed = seed ^ static_cast<std::uint64_t>(i);
        FransonSpec point_spec = franson;
        point_spec.phi1 = phases_rad[i];
        point_spec.phi2 = 0.0;

        auto pairs = sample_pairs(source, per_point_duration_s, point_seed);
        auto routed = route_pairs(pairs, point_spec, state, source.tau_s, point_seed);
        TagStream tags_s = detect(routed.signal_ps, det_signal, 0, duration_with_tail_ps,
                                  derive_seed(point_seed, SeedStage::detect_signal));
        TagStream tags_i = detect(routed.idler_ps, det_idler, 1, duration_with_tail_ps,
                                  derive_seed(point_seed, SeedStage::detect_idler));

        const auto ts = channel_times(tags_s, 0);
        const auto ti = channel_times(tags_i, 1);
        const double acq_s = duration_with_tail_ps * 1e-12;

        FringePoint pt;
        pt.phase_rad = phases_rad[i];
        const auto mid = coincidence_count(ts, ti, result.window_ps, 0.0, acq_s);
        const auto minus = coincidence_count(ts, ti, result.window_ps, -result.delta_t_ps, acq_s);
        const auto plus = coincidence_count(ts, ti, result.window_ps, result.delta_t_ps, acq_s);
        pt.middle_raw = mid.coincidences;
        pt.accidentals = mid.accidentals_estimate;
        pt.middle_corrected = mid.coincidences - mid.accidentals_estimate;
        pt.side_minus = minus.coincidences;
        pt.side_plus = plus.coincidences;
        result.points.push_back(pt);
    }
    return result;
}

EntanglementVerdict entanglement_verdict(double visibility, double stderr_value) {
    if (!(visibility >= 0.0 && visibility <= 1.0))
        throw std::invalid_argument("entanglement_verdict: visibility must be in [0,1]");
    const double chsh_bound = 1.0 / std::sqrt(2.0);
    EntanglementVerdict v;
    v.classical_violated = visibility > 0.5;
    v.chsh_violated = visibility > chsh_bound;
    auto margin = [&](double bound) {
        if (stderr_value > 0.0) {
            const double m = (visibility - bound) / stderr_value;
            return std::clamp(m, -1e9, 1e9);
        }
        return visibility > bound ? 1e9 : -1e9;
    };
    v.margin_classical_sigma = margin(0.5);
    v.margin_chsh_sigma = margin(chsh_bound);
    return v;
}

}  // namespace biphoton
