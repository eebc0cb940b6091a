// biphoton: simulate a microring photon-pair source and run the
// time-correlation / entanglement analysis chain on the resulting tag streams.

#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"

using namespace biphoton::cli;

namespace {

void add_common(CLI::App* cmd, CommonArgs& common, bool needs_config = true) {
    auto* config = cmd->add_option("-c,--config", common.config_path, "config JSON file");
    auto* preset =
        cmd->add_option("-p,--preset", common.preset, "named preset from the presets directory");
    cmd->add_option("-o,--out", common.out_dir, "output directory (overrides run.output_dir)");
    auto* seed = cmd->add_option("--seed", common.seed, "seed override");
    seed->each([&common](const std::string&) { common.seed_set = true; });
    if (needs_config) {
        config->excludes(preset);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"microring photon-pair source simulator and analysis toolkit"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::simple);

    CommonArgs scan_common, sim_common, corr_common, power_common, franson_common;
    ScanArgs scan_args;
    CorrelateArgs corr_args;
    PowerScanArgs power_args;
    FransonArgs franson_args;
    std::string report_dir;
    std::string powers_csv, phases_csv;

    auto* scan = app.add_subcommand("scan", "synthesize and fit a resonance transmission scan");
    add_common(scan, scan_common);
    scan->add_option("--line", scan_args.line, "mode index relative to the pump (default 2)");
    scan->add_option("--span-fwhm", scan_args.span_fwhm, "scan span in linewidths");
    scan->add_option("--points", scan_args.points, "number of scan points")
        ->check(CLI::Range(16, 2000000));
    scan->add_option("--noise", scan_args.noise, "additive RMS noise on transmission");
    scan->add_option("--delta-t-k", scan_args.delta_t_kelvin,
                     "temperature offset in kelvin applied before scanning");

    auto* simulate =
        app.add_subcommand("simulate", "generate pair events and detector tag streams");
    add_common(simulate, sim_common);

    auto* correlate =
        app.add_subcommand("correlate", "cross-correlate two .bpts tag files");
    correlate->add_option("file_a", corr_args.file_a, "first tag stream")->required();
    correlate->add_option("file_b", corr_args.file_b, "second tag stream")->required();
    add_common(correlate, corr_common, false);
    correlate->add_option("--bin", corr_args.bin_ps, "bin width in ps (default 84)");
    correlate->add_option("--span", corr_args.span_ps, "max |delay| in ps (default 50000)");
    correlate->add_flag("--normalize", corr_args.normalize, "emit g-normalized column");
    correlate->add_flag("--background-correct", corr_args.background_correct,
                        "subtract the wing-estimated flat background");
    correlate->add_flag("--fit", corr_args.fit, "fit the double-exponential peak");
    correlate->add_option("--channel-a", corr_args.channel_a, "channel id in file_a");
    correlate->add_option("--channel-b", corr_args.channel_b, "channel id in file_b");

    auto* powerscan =
        app.add_subcommand("powerscan", "singles/coincidence rates across pump powers");
    add_common(powerscan, power_common);
    powerscan->add_option("--powers", powers_csv, "comma-separated pump powers in mW");
    powerscan->add_option("--duration", power_args.duration_s, "seconds per power point");
    powerscan->add_option("--window-tau", power_args.window_tau,
                          "coincidence window in units of tau");

    auto* franson =
        app.add_subcommand("franson", "post-selected energy-time entanglement fringe");
    add_common(franson, franson_common);
    franson->add_option("--phases", phases_csv, "comma-separated phase list in rad");
    franson->add_option("--points", franson_args.points,
                        "number of phase points over 1.5 periods");
    franson->add_option("--point-duration", franson_args.point_duration_s,
                        "seconds per phase point");

    auto* report = app.add_subcommand("report", "consolidate analysis outputs in a run dir");
    report->add_option("dir", report_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    auto parse_list = [](const std::string& csv, std::vector<double>& into) {
        if (csv.empty()) return true;
        into.clear();
        std::size_t pos = 0;
        while (pos < csv.size()) {
            std::size_t next = csv.find(',', pos);
            if (next == std::string::npos) next = csv.size();
            try {
                into.push_back(std::stod(csv.substr(pos, next - pos)));
            } catch (const std::exception&) {
                return false;
            }
            pos = next + 1;
        }
        return true;
    };

    if (scan->parsed()) return cmd_scan(scan_common, scan_args);
    if (simulate->parsed()) return cmd_simulate(sim_common);
    if (correlate->parsed()) return cmd_correlate(corr_common, corr_args);
    if (powerscan->parsed()) {
        if (!parse_list(powers_csv, power_args.powers_mw)) return kExitUsage;
        return cmd_powerscan(power_common, power_args);
    }
    if (franson->parsed()) {
        if (!parse_list(phases_csv, franson_args.phases_rad)) return kExitUsage;
        return cmd_franson(franson_common, franson_args);
    }
    if (report->parsed()) return cmd_report(report_dir);
    return kExitUsage;
}
