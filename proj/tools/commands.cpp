#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "biphoton/config.hpp"
#include "biphoton/correlation.hpp"
#include "biphoton/fitting.hpp"
#include "biphoton/franson.hpp"
#include "biphoton/pipeline.hpp"
#include "json.hpp"

namespace biphoton::cli {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

ExperimentConfig load_from_args(const CommonArgs& common) {
    if (!common.config_path.empty() && !common.preset.empty())
        throw std::invalid_argument("give either --config or --preset, not both");
    ExperimentConfig cfg;
    if (!common.preset.empty()) {
        cfg = load_preset(common.preset);
    } else if (!common.config_path.empty()) {
        if (!fs::exists(common.config_path))
            throw std::invalid_argument("config file not found: " + common.config_path);
        cfg = load_config_file(common.config_path);
    } else {
        throw std::invalid_argument("a config is required: pass --config FILE or --preset NAME");
    }
    if (common.seed_set) cfg.run.seed = common.seed;
    if (!common.out_dir.empty()) cfg.run.output_dir = common.out_dir;
    return cfg;
}

fs::path ensure_out_dir(const ExperimentConfig& cfg) {
    fs::path dir(cfg.run.output_dir);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << text;
}

ordered_json fit_to_json(const FitResult& fit) {
    ordered_json params = ordered_json::object();
    ordered_json stderrs = ordered_json::object();
    for (std::size_t i = 0; i < fit.names.size(); ++i) {
        params[fit.names[i]] = fit.params[i];
        stderrs[fit.names[i]] = fit.stderrs[i];
    }
    return ordered_json{{"params", params},
                        {"stderr", stderrs},
                        {"residual_norm", fit.residual_norm},
                        {"chi2_reduced", fit.chi2_reduced},
                        {"iterations", fit.iterations},
                        {"converged", fit.converged}};
}

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const TagStreamError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}

std::string format_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

int cmd_scan(const CommonArgs& common, const ScanArgs& args) {
    return run_guarded([&]() {
        auto cfg = load_from_args(common);
        const auto out = ensure_out_dir(cfg);

        const int order = std::max(1, std::abs(args.line));
        auto lines = resonance_grid(cfg.resonator, order);
        ResonanceLine line = lines[static_cast<std::size_t>(args.line + order)];
        double shift_pm = 0.0;
        if (args.delta_t_kelvin != 0.0) {
            shift_pm = thermal_shift_pm(cfg.resonator, args.delta_t_kelvin);
            line = shifted_line(line, shift_pm);
        }

        const double span = args.span_fwhm * line.fwhm_hz;
        const double step = span / static_cast<double>(args.points - 1);
        auto scan = transmission_scan(cfg.resonator, line, line.center_hz - span / 2.0,
                                      line.center_hz + span / 2.0, step, args.noise,
                                      cfg.run.seed);
        {
            std::ofstream os(out / "scan.csv", std::ios::binary | std::ios::trunc);
            write_scan_csv(scan, os);
        }

        auto fit = fit_lorentzian(scan);
        ordered_json j = fit_to_json(fit);
        j["line"] = {{"mode_index", line.mode_index},
                     {"center_hz", line.center_hz},
                     {"fwhm_hz", line.fwhm_hz},
                     {"thermal_shift_pm", shift_pm}};
        write_text(out / "scan_fit.json", j.dump(2) + "\n");

        if (!fit.converged) {
            std::cerr << "scan fit did not converge\n";
            return kExitFit;
        }
        std::cout << "scan: fwhm " << format_g(fit.param("fwhm_hz") * 1e-6) << " MHz, Q "
                  << format_g(fit.param("q_loaded")) << "\n";
        return kExitOk;
    });
}

int cmd_simulate(const CommonArgs& common) {
    return run_guarded([&]() {
        auto cfg = load_from_args(common);
        const auto out = ensure_out_dir(cfg);

        auto sim = simulate_streams(cfg);
        write_bpts(sim.signal, out / "signal.bpts");
        write_bpts(sim.idler, out / "idler.bpts");

        ordered_json manifest;
        manifest["config"] = ordered_json::parse(config_to_json_text(cfg));
        manifest["pair_rate_model_per_s"] = pair_rate(cfg.source);
        manifest["pairs_generated"] = sim.pairs_generated;
        manifest["mean_pairs_per_mode"] = mean_pairs_per_mode(cfg.source);
        manifest["multipair_fraction"] = multipair_fraction(cfg.source);
        manifest["signal_tags"] = sim.signal.records.size();
        manifest["idler_tags"] = sim.idler.records.size();
        manifest["signal_rate_per_s"] =
            static_cast<double>(sim.signal.records.size()) / sim.duration_s;
        manifest["idler_rate_per_s"] =
            static_cast<double>(sim.idler.records.size()) / sim.duration_s;
        manifest["files"] = {{"signal", "signal.bpts"}, {"idler", "idler.bpts"}};
        write_text(out / "manifest.json", manifest.dump(2) + "\n");

        std::cout << "simulate: " << sim.pairs_generated << " pairs, "
                  << sim.signal.records.size() << " signal tags, "
                  << sim.idler.records.size() << " idler tags\n";
        return kExitOk;
    });
}

int cmd_correlate(const CommonArgs& common, const CorrelateArgs& args) {
    return run_guarded([&]() {
        fs::path out_dir(common.out_dir.empty() ? "out" : common.out_dir);
        fs::create_directories(out_dir);

        auto a = read_bpts(args.file_a);
        auto b = read_bpts(args.file_b);
        if (a.header.tick_ps != b.header.tick_ps)
            throw TagStreamError(TagStreamError::Kind::tick_mismatch, 8,
                                 "tick mismatch between input files");

        Histogram h = cross_correlate(a, static_cast<std::uint16_t>(args.channel_a), b,
                                      static_cast<std::uint16_t>(args.channel_b),
                                      args.bin_ps, args.span_ps);
        Histogram working = h;
        if (args.background_correct) working = background_correct(working);
        Histogram normalized;
        bool have_normalized = false;
        if (args.normalize || args.fit) {
            normalized = normalize(working);
            have_normalized = true;
        }

        {
            std::ofstream os(out_dir / "histogram.csv", std::ios::binary | std::ios::trunc);
            write_histogram_csv(working, have_normalized ? &normalized : nullptr, os);
        }
        ordered_json sidecar{{"bin_ps", h.bin_width_ps},
                             {"span_ps", args.span_ps},
                             {"acquisition_s", h.acquisition_s},
                             {"rate_a_per_s", h.rate_a},
                             {"rate_b_per_s", h.rate_b},
                             {"total_counts", h.total()},
                             {"background_corrected", working.background_corrected},
                             {"background_estimate", working.background_estimate},
                             {"normalized_column", have_normalized}};
        write_text(out_dir / "histogram.json", sidecar.dump(2) + "\n");

        if (args.fit) {
            auto fit = fit_double_exponential(have_normalized ? normalized : working);
            write_text(out_dir / "correlation_fit.json", fit_to_json(fit).dump(2) + "\n");
            if (!fit.converged) {
                std::cerr << "correlation fit did not converge\n";
                return kExitFit;
            }
            std::cout << "correlate: tau " << format_g(fit.param("tau_ps") * 1e-3)
                      << " ns, bandwidth " << format_g(fit.param("dnu_hz") * 1e-6) << " MHz\n";
        } else {
            std::cout << "correlate: " << format_g(h.total()) << " counts in "
                      << h.counts.size() << " bins\n";
        }
        return kExitOk;
    });
}

int cmd_powerscan(const CommonArgs& common, const PowerScanArgs& args) {
    return run_guarded([&]() {
        auto cfg = load_from_args(common);
        const auto out = ensure_out_dir(cfg);
        if (args.powers_mw.size() < 2)
            throw std::invalid_argument("powerscan needs at least two power points");

        const double duration = args.duration_s > 0.0 ? args.duration_s : cfg.run.duration_s;
        const double tau_ps = cfg.source.tau_s * 1e12;
        const double window_ps = args.window_tau * tau_ps;
        const double capture = 1.0 - std::exp(-args.window_tau / 2.0);

        std::ostringstream csv;
        csv << "power_mw,singles_signal_per_s,singles_idler_per_s,coincidences_per_s,"
               "accidentals_per_s,car,pair_rate_inferred_per_s\n";
        std::vector<double> log_p, log_singles, log_coinc;
        double r_at_max = 0.0, car_at_max = 0.0;
        for (std::size_t i = 0; i < args.powers_mw.size(); ++i) {
            ExperimentConfig point = cfg;
            point.source.pump_power_mw = args.powers_mw[i];
            point.run.duration_s = duration;
            point.run.seed = splitmix64(cfg.run.seed + i);
            auto sim = simulate_streams(point);
            const double s_sig =
                static_cast<double>(sim.signal.records.size()) / duration;
            const double s_idl =
                static_cast<double>(sim.idler.records.size()) / duration;
            const auto cc =
                coincidence_count(sim.signal, kSignalChannel, sim.idler, kIdlerChannel,
                                  window_ps, 0.0);
            const double c_rate = cc.coincidences / duration;
            const double acc_rate = cc.accidentals_estimate / duration;
            const double c_corrected = std::max(c_rate - acc_rate, 0.0);
            const double r_inferred =
                c_corrected > 0.0 ? s_sig * s_idl / c_corrected * capture : 0.0;
            csv << format_g(args.powers_mw[i]) << ',' << format_g(s_sig) << ','
                << format_g(s_idl) << ',' << format_g(c_rate) << ',' << format_g(acc_rate)
                << ',' << format_g(cc.car) << ',' << format_g(r_inferred) << '\n';
            log_p.push_back(std::log(args.powers_mw[i]));
            log_singles.push_back(std::log(s_sig));
            log_coinc.push_back(std::log(c_corrected));
            if (i + 1 == args.powers_mw.size()) {
                r_at_max = r_inferred;
                car_at_max = cc.car;
            }
        }
        write_text(out / "rates.csv", csv.str());

        BatchModel linear = [](std::span<const double> p, std::span<const double> x,
                               std::span<double> y) {
            for (std::size_t i = 0; i < x.size(); ++i) y[i] = p[0] * x[i] + p[1];
        };
        DataSet singles_data{log_p, log_singles, {}};
        DataSet coinc_data{log_p, log_coinc, {}};
        FitOptions opt;
        auto singles_fit =
            least_squares(linear, singles_data, {2.0, 0.0}, {"slope", "intercept"}, opt);
        auto coinc_fit =
            least_squares(linear, coinc_data, {2.0, 0.0}, {"slope", "intercept"}, opt);

        const double p_max = args.powers_mw.back();
        const double brightness = r_at_max / (p_max * p_max);
        const double dnu_hz = tau_s_to_bandwidth_hz(cfg.source.tau_s);
        ordered_json j;
        j["singles_slope"] = fit_to_json(singles_fit);
        j["coincidence_slope"] = fit_to_json(coinc_fit);
        j["window_ps"] = window_ps;
        j["capture_fraction"] = capture;
        j["max_power_mw"] = p_max;
        j["pair_rate_inferred_at_max_power_per_s"] = r_at_max;
        j["car_at_max_power"] = car_at_max;
        j["brightness_inferred_s_mw2"] = brightness;
        j["brightness_cal_s_mw2"] = cfg.source.brightness_cal;
        j["bandwidth_hz"] = dnu_hz;
        j["modal_brightness_cal_mw2"] = modal_brightness(cfg.source.brightness_cal, dnu_hz);
        j["modal_brightness_inferred_mw2"] = modal_brightness(brightness, dnu_hz);
        write_text(out / "slopes.json", j.dump(2) + "\n");

        std::cout << "powerscan: singles slope " << format_g(singles_fit.param("slope"))
                  << ", coincidence slope " << format_g(coinc_fit.param("slope"))
                  << ", inferred pair rate " << format_g(r_at_max) << "/s\n";
        return kExitOk;
    });
}

int cmd_franson(const CommonArgs& common, const FransonArgs& args) {
    return run_guarded([&]() {
        auto cfg = load_from_args(common);
        if (!cfg.franson)
            throw std::invalid_argument("config has no franson section");
        const auto out = ensure_out_dir(cfg);

        std::vector<double> phases = args.phases_rad;
        if (phases.empty()) {
            if (args.points < 6)
                throw std::invalid_argument("franson needs at least 6 phase points");
            for (int i = 0; i < args.points; ++i)
                phases.push_back(3.0 * kPi * static_cast<double>(i) /
                                 static_cast<double>(args.points - 1));
        }
        const double point_duration =
            args.point_duration_s > 0.0 ? args.point_duration_s : cfg.run.duration_s;

        auto scan = fringe_scan(cfg.source, cfg.det_signal, cfg.det_idler, *cfg.franson,
                                cfg.state, phases, point_duration, cfg.run.seed);

        std::ostringstream csv;
        csv << "phase_rad,middle_raw,middle_corrected,side_minus,side_plus\n";
        for (const auto& pt : scan.points)
            csv << format_g(pt.phase_rad) << ',' << format_g(pt.middle_raw) << ','
                << format_g(pt.middle_corrected) << ',' << format_g(pt.side_minus) << ','
                << format_g(pt.side_plus) << '\n';
        write_text(out / "fringe.csv", csv.str());

        auto fit = fit_sinusoid(scan.phases(), scan.corrected_counts());
        auto corrected = scan.corrected_counts();
        const double raw_max = *std::max_element(corrected.begin(), corrected.end());
        const double raw_min = *std::min_element(corrected.begin(), corrected.end());
        const double raw_visibility =
            raw_max + raw_min > 0.0 ? (raw_max - raw_min) / (raw_max + raw_min) : 0.0;
        auto verdict = entanglement_verdict(fit.visibility, fit.visibility_stderr);

        ordered_json j;
        j["visibility"] = fit.visibility;
        j["visibility_stderr"] = fit.visibility_stderr;
        j["visibility_raw_max_min"] = raw_visibility;
        j["r_squared"] = fit.r_squared;
        j["fit"] = fit_to_json(fit.fit);
        j["verdict"] = {{"classical_violated", verdict.classical_violated},
                        {"chsh_violated", verdict.chsh_violated},
                        {"margin_classical_sigma", verdict.margin_classical_sigma},
                        {"margin_chsh_sigma", verdict.margin_chsh_sigma}};
        j["delta_t_ps"] = scan.delta_t_ps;
        j["window_ps"] = scan.window_ps;
        j["per_point_duration_s"] = scan.per_point_duration_s;
        write_text(out / "visibility.json", j.dump(2) + "\n");

        if (!fit.fit.converged) {
            std::cerr << "fringe fit did not converge\n";
            return kExitFit;
        }
        std::cout << "franson: visibility " << format_g(fit.visibility) << " +- "
                  << format_g(fit.visibility_stderr) << " (classical "
                  << (verdict.classical_violated ? "violated" : "not violated") << ", CHSH "
                  << (verdict.chsh_violated ? "violated" : "not violated") << ")\n";
        return kExitOk;
    });
}

int cmd_report(const std::string& run_dir) {
    return run_guarded([&]() {
        const fs::path dir(run_dir);
        ordered_json report;
        bool any = false;

        auto load_if = [&](const char* name, ordered_json& into) {
            const auto path = dir / name;
            if (!fs::exists(path)) return false;
            std::ifstream is(path);
            into = ordered_json::parse(is);
            return true;
        };

        ordered_json manifest, slopes, corr_fit, scan_fit, visibility;
        if (load_if("manifest.json", manifest)) {
            report["simulation"] = {{"pairs_generated", manifest.value("pairs_generated", 0ull)},
                                    {"signal_rate_per_s", manifest.value("signal_rate_per_s", 0.0)},
                                    {"idler_rate_per_s", manifest.value("idler_rate_per_s", 0.0)},
                                    {"mean_pairs_per_mode", manifest.value("mean_pairs_per_mode", 0.0)},
                                    {"multipair_fraction", manifest.value("multipair_fraction", 0.0)}};
            any = true;
        }
        if (load_if("slopes.json", slopes)) {
            const double brightness = slopes.value("brightness_inferred_s_mw2", 0.0);
            const double dnu_mhz = slopes.value("bandwidth_hz", 0.0) * 1e-6;
            const double spectral =
                dnu_mhz > 0.0 ? brightness / dnu_mhz : 0.0;
            report["power_scaling"] = {
                {"singles_slope", slopes["singles_slope"]["params"]["slope"]},
                {"coincidence_slope", slopes["coincidence_slope"]["params"]["slope"]},
                {"pair_rate_inferred_at_max_power_per_s",
                 slopes.value("pair_rate_inferred_at_max_power_per_s", 0.0)},
                {"car_at_max_power", slopes.value("car_at_max_power", 0.0)},
                {"brightness_inferred_s_mw2", brightness},
                {"modal_brightness_cal_mw2", slopes.value("modal_brightness_cal_mw2", 0.0)},
                {"spectral_brightness_s_mw2_mhz", spectral},
                {"spectral_brightness_reference_value", 430000.0},
                {"spectral_brightness_note",
                 "direct quotient brightness/bandwidth_MHz sits an order of magnitude below "
                 "the 430000 headline figure for this operating point; the quotient "
                 "definition is reported"}};
            any = true;
        }
        if (load_if("correlation_fit.json", corr_fit)) {
            report["correlation"] = {{"tau_ps", corr_fit["params"].value("tau_ps", 0.0)},
                                     {"bandwidth_hz", corr_fit["params"].value("dnu_hz", 0.0)},
                                     {"converged", corr_fit.value("converged", false)}};
            any = true;
        }
        if (load_if("scan_fit.json", scan_fit)) {
            report["resonance_scan"] = {{"fwhm_hz", scan_fit["params"].value("fwhm_hz", 0.0)},
                                        {"q_loaded", scan_fit["params"].value("q_loaded", 0.0)},
                                        {"converged", scan_fit.value("converged", false)}};
            any = true;
        }
        if (load_if("visibility.json", visibility)) {
            report["entanglement"] = {{"visibility", visibility.value("visibility", 0.0)},
                                      {"visibility_stderr", visibility.value("visibility_stderr", 0.0)},
                                      {"verdict", visibility["verdict"]}};
            any = true;
        }
        if (!any)
            throw std::invalid_argument("no analysis outputs found in " + dir.string());

        write_text(dir / "report.json", report.dump(2) + "\n");

        std::ostringstream md;
        md << "# Run report\n\n";
        if (report.contains("simulation")) {
            const auto& s = report["simulation"];
            md << "## Simulation\n"
               << "- pairs generated: " << s["pairs_generated"] << "\n"
               << "- singles rates: " << s["signal_rate_per_s"] << " / "
               << s["idler_rate_per_s"] << " per s\n"
               << "- mean pairs per mode: " << s["mean_pairs_per_mode"] << "\n"
               << "- multi-pair fraction: " << s["multipair_fraction"] << "\n\n";
        }
        if (report.contains("power_scaling")) {
            const auto& p = report["power_scaling"];
            md << "## Power scaling and brightness\n"
               << "- singles slope (log-log): " << p["singles_slope"] << "\n"
               << "- coincidence slope (log-log): " << p["coincidence_slope"] << "\n"
               << "- inferred pair rate at max power: "
               << p["pair_rate_inferred_at_max_power_per_s"] << " per s\n"
               << "- CAR at max power: " << p["car_at_max_power"] << "\n"
               << "- inferred brightness: " << p["brightness_inferred_s_mw2"]
               << " s^-1 mW^-2\n"
               << "- modal brightness (calibration): " << p["modal_brightness_cal_mw2"]
               << " mW^-2\n"
               << "- spectral brightness: " << p["spectral_brightness_s_mw2_mhz"]
               << " s^-1 mW^-2 MHz^-1 (note: " << p["spectral_brightness_note"].get<std::string>()
               << ")\n\n";
        }
        if (report.contains("resonance_scan")) {
            md << "## Resonance scan\n- fitted FWHM: "
               << report["resonance_scan"]["fwhm_hz"] << " Hz\n- loaded Q: "
               << report["resonance_scan"]["q_loaded"] << "\n\n";
        }
        if (report.contains("correlation")) {
            md << "## Cross-correlation\n- fitted tau: " << report["correlation"]["tau_ps"]
               << " ps\n- biphoton bandwidth: " << report["correlation"]["bandwidth_hz"]
               << " Hz\n\n";
        }
        if (report.contains("entanglement")) {
            const auto& e = report["entanglement"];
            md << "## Time-bin entanglement\n- visibility: " << e["visibility"] << " +- "
               << e["visibility_stderr"] << "\n- classical bound violated: "
               << e["verdict"]["classical_violated"] << "\n- CHSH bound violated: "
               << e["verdict"]["chsh_violated"] << "\n\n";
        }
        write_text(dir / "report.md", md.str());
        std::cout << "report: written to " << (dir / "report.json").string() << "\n";
        return kExitOk;
    });
}

}  // namespace biphoton::cli
