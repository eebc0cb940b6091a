#include "biphoton/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace biphoton {

namespace {

using ordered_json = nlohmann::ordered_json;

void reject_unknown_keys(const ordered_json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& item : obj.items())
        if (!allowed.contains(item.key()))
            throw std::invalid_argument("config: unknown key \"" + item.key() + "\" in " + where);
}

ResonatorSpec resonator_from_json(const ordered_json& j) {
    reject_unknown_keys(j, {"pump_wavelength_nm", "fsr_ghz", "q_intrinsic", "q_coupling",
                            "radius_um", "thermo_optic_pm_per_k", "base_temperature_c"},
                        "resonator");
    ResonatorSpec spec;
    spec.pump_wavelength_nm = j.value("pump_wavelength_nm", spec.pump_wavelength_nm);
    if (j.contains("fsr_ghz")) spec.fsr_hz = j.at("fsr_ghz").get<double>() * 1e9;
    spec.q_intrinsic = j.value("q_intrinsic", spec.q_intrinsic);
    spec.q_coupling = j.value("q_coupling", spec.q_coupling);
    spec.radius_um = j.value("radius_um", spec.radius_um);
    spec.thermo_optic_pm_per_k = j.value("thermo_optic_pm_per_k", spec.thermo_optic_pm_per_k);
    spec.base_temperature_c = j.value("base_temperature_c", spec.base_temperature_c);
    return spec;
}

DetectorSpec detector_from_json(const ordered_json& j, const std::string& where) {
    reject_unknown_keys(j, {"efficiency", "path_loss_db", "jitter_sigma_ps", "dark_prob_per_ns",
                            "dead_time_ns", "tick_ps", "gate"},
                        where);
    DetectorSpec spec;
    spec.efficiency = j.value("efficiency", spec.efficiency);
    spec.path_loss_db = j.value("path_loss_db", spec.path_loss_db);
    spec.jitter_sigma_ps = j.value("jitter_sigma_ps", spec.jitter_sigma_ps);
    spec.dark_prob_per_ns = j.value("dark_prob_per_ns", spec.dark_prob_per_ns);
    spec.dead_time_ns = j.value("dead_time_ns", spec.dead_time_ns);
    spec.tick_ps = j.value("tick_ps", spec.tick_ps);
    if (j.contains("gate") && !j.at("gate").is_null()) {
        const auto& g = j.at("gate");
        reject_unknown_keys(g, {"period_ns", "width_ns"}, where + ".gate");
        GateSpec gate;
        gate.period_ns = g.value("period_ns", gate.period_ns);
        gate.width_ns = g.value("width_ns", gate.width_ns);
        spec.gate = gate;
    } else {
        spec.gate.reset();
    }
    return spec;
}

FransonSpec franson_from_json(const ordered_json& j) {
    reject_unknown_keys(j, {"delta_t_ns", "phi1", "phi2", "splitter_ratios",
                            "phase_noise_sigma_rad", "long_arm_excess_loss_db"},
                        "franson");
    FransonSpec spec;
    spec.delta_t_ns = j.value("delta_t_ns", spec.delta_t_ns);
    spec.phi1 = j.value("phi1", spec.phi1);
    spec.phi2 = j.value("phi2", spec.phi2);
    if (j.contains("splitter_ratios")) {
        const auto& arr = j.at("splitter_ratios");
        if (!arr.is_array() || arr.size() != 4)
            throw std::invalid_argument("config: franson.splitter_ratios must have 4 entries");
        for (std::size_t i = 0; i < 4; ++i) spec.splitter_ratios[i] = arr[i].get<double>();
    }
    spec.phase_noise_sigma_rad = j.value("phase_noise_sigma_rad", spec.phase_noise_sigma_rad);
    spec.long_arm_excess_loss_db =
        j.value("long_arm_excess_loss_db", spec.long_arm_excess_loss_db);
    return spec;
}

ordered_json detector_to_json(const DetectorSpec& d) {
    ordered_json j;
    j["efficiency"] = d.efficiency;
    j["path_loss_db"] = d.path_loss_db;
    j["jitter_sigma_ps"] = d.jitter_sigma_ps;
    j["dark_prob_per_ns"] = d.dark_prob_per_ns;
    j["dead_time_ns"] = d.dead_time_ns;
    j["tick_ps"] = d.tick_ps;
    if (d.gate) {
        j["gate"] = {{"period_ns", d.gate->period_ns}, {"width_ns", d.gate->width_ns}};
    } else {
        j["gate"] = nullptr;
    }
    return j;
}

}  // namespace

void ExperimentConfig::validate() const {
    resonator.validate();
    source.validate();
    det_signal.validate();
    det_idler.validate();
    state.validate();
    if (franson) franson->validate(source.tau_s);
    if (!(run.duration_s > 0.0))
        throw std::invalid_argument("config: run.duration_s must be positive");
}

ExperimentConfig config_from_json_text(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    reject_unknown_keys(j, {"resonator", "source", "detectors", "franson", "entangled_state",
                            "run"},
                        "config");
    ExperimentConfig cfg;
    if (j.contains("resonator")) cfg.resonator = resonator_from_json(j.at("resonator"));

    // Source spec, with its Q/ring geometry tied to the resonator.
    cfg.source.q_loaded = cfg.resonator.q_loaded();
    cfg.source.ring_length_m = cfg.resonator.ring_length_m();
    double tau_ns = 0.0;
    if (j.contains("source")) {
        const auto& s = j.at("source");
        reject_unknown_keys(s, {"gamma_w_m", "pump_power_mw", "tau_ns", "tau_signal_ns",
                                "tau_idler_ns", "brightness_cal_s_mw2", "mode",
                                "ou_corr_factor"},
                            "source");
        cfg.source.gamma_per_w_m = s.value("gamma_w_m", cfg.source.gamma_per_w_m);
        cfg.source.pump_power_mw = s.value("pump_power_mw", cfg.source.pump_power_mw);
        tau_ns = s.value("tau_ns", 0.0);
        cfg.source.tau_signal_s = s.value("tau_signal_ns", 0.0) * 1e-9;
        cfg.source.tau_idler_s = s.value("tau_idler_ns", 0.0) * 1e-9;
        cfg.source.brightness_cal = s.value("brightness_cal_s_mw2", cfg.source.brightness_cal);
        cfg.source.ou_corr_factor = s.value("ou_corr_factor", cfg.source.ou_corr_factor);
        if (s.contains("mode")) {
            const std::string mode = s.at("mode").get<std::string>();
            if (mode == "poisson-pairs") {
                cfg.source.mode = SourceMode::poisson_pairs;
            } else if (mode == "gaussian-field") {
                cfg.source.mode = SourceMode::gaussian_field;
            } else {
                throw std::invalid_argument("config: unknown source.mode \"" + mode + "\"");
            }
        }
    }
    if (tau_ns > 0.0) {
        cfg.source.tau_s = tau_ns * 1e-9;
    } else {
        const double dnu = bandwidth_from_q(cfg.resonator.pump_frequency_hz(),
                                            cfg.resonator.q_loaded());
        cfg.source.tau_s = bandwidth_hz_to_tau_s(dnu);
    }

    if (j.contains("detectors")) {
        const auto& d = j.at("detectors");
        reject_unknown_keys(d, {"signal", "idler"}, "detectors");
        if (d.contains("signal")) cfg.det_signal = detector_from_json(d.at("signal"), "signal");
        if (d.contains("idler")) cfg.det_idler = detector_from_json(d.at("idler"), "idler");
    }
    if (j.contains("franson") && !j.at("franson").is_null())
        cfg.franson = franson_from_json(j.at("franson"));
    if (j.contains("entangled_state")) {
        const auto& e = j.at("entangled_state");
        reject_unknown_keys(e, {"visibility_intrinsic"}, "entangled_state");
        cfg.state.visibility_intrinsic =
            e.value("visibility_intrinsic", cfg.state.visibility_intrinsic);
    }

    if (!j.contains("run") || !j.at("run").contains("seed"))
        throw std::invalid_argument("config: run.seed is required (no implicit entropy)");
    const auto& r = j.at("run");
    reject_unknown_keys(r, {"duration_s", "seed", "output_dir"}, "run");
    cfg.run.duration_s = r.value("duration_s", cfg.run.duration_s);
    cfg.run.seed = r.at("seed").get<std::uint64_t>();
    cfg.run.output_dir = r.value("output_dir", cfg.run.output_dir);

    if (const char* env_seed = std::getenv("BIPHOTON_SEED"))
        cfg.run.seed = std::strtoull(env_seed, nullptr, 10);

    cfg.validate();
    return cfg;
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
    ordered_json j;
    j["resonator"] = {{"pump_wavelength_nm", cfg.resonator.pump_wavelength_nm},
                      {"fsr_ghz", cfg.resonator.fsr_hz * 1e-9},
                      {"q_intrinsic", cfg.resonator.q_intrinsic},
                      {"q_coupling", cfg.resonator.q_coupling},
                      {"radius_um", cfg.resonator.radius_um},
                      {"thermo_optic_pm_per_k", cfg.resonator.thermo_optic_pm_per_k},
                      {"base_temperature_c", cfg.resonator.base_temperature_c}};
    j["source"] = {{"gamma_w_m", cfg.source.gamma_per_w_m},
                   {"pump_power_mw", cfg.source.pump_power_mw},
                   {"tau_ns", cfg.source.tau_s * 1e9},
                   {"brightness_cal_s_mw2", cfg.source.brightness_cal},
                   {"mode", cfg.source.mode == SourceMode::poisson_pairs ? "poisson-pairs"
                                                                         : "gaussian-field"},
                   {"ou_corr_factor", cfg.source.ou_corr_factor}};
    if (cfg.source.tau_signal_s > 0.0)
        j["source"]["tau_signal_ns"] = cfg.source.tau_signal_s * 1e9;
    if (cfg.source.tau_idler_s > 0.0)
        j["source"]["tau_idler_ns"] = cfg.source.tau_idler_s * 1e9;
    j["detectors"] = {{"signal", detector_to_json(cfg.det_signal)},
                      {"idler", detector_to_json(cfg.det_idler)}};
    if (cfg.franson) {
        j["franson"] = {{"delta_t_ns", cfg.franson->delta_t_ns},
                        {"phi1", cfg.franson->phi1},
                        {"phi2", cfg.franson->phi2},
                        {"splitter_ratios", cfg.franson->splitter_ratios},
                        {"phase_noise_sigma_rad", cfg.franson->phase_noise_sigma_rad},
                        {"long_arm_excess_loss_db", cfg.franson->long_arm_excess_loss_db}};
    }
    j["entangled_state"] = {{"visibility_intrinsic", cfg.state.visibility_intrinsic}};
    j["run"] = {{"duration_s", cfg.run.duration_s},
                {"seed", cfg.run.seed},
                {"output_dir", cfg.run.output_dir}};
    return j.dump(2) + "\n";
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("config: cannot open " + path.string());
    std::stringstream buffer;
    buffer << is.rdbuf();
    return config_from_json_text(buffer.str());
}

std::filesystem::path preset_path(const std::string& name) {
    const std::string file = name + ".json";
    std::vector<std::filesystem::path> roots;
    if (const char* env = std::getenv("BIPHOTON_PRESET_DIR")) roots.emplace_back(env);
    roots.emplace_back("presets");
#ifdef BIPHOTON_SOURCE_PRESET_DIR
    roots.emplace_back(BIPHOTON_SOURCE_PRESET_DIR);
#endif
    for (const auto& root : roots) {
        const auto candidate = root / file;
        if (std::filesystem::exists(candidate)) return candidate;
    }
    throw std::invalid_argument("config: preset \"" + name + "\" not found");
}

ExperimentConfig load_preset(const std::string& name) {
    return load_config_file(preset_path(name));
}

}  // namespace biphoton
