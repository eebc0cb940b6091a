#pragma once

// Subcommand implementations behind the biphoton CLI.
// Exit codes: 0 success, 2 usage/config error, 3 data error,
// 4 fit non-convergence.

#include <cstdint>
#include <string>
#include <vector>

namespace biphoton::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitFit = 4;

struct CommonArgs {
    std::string config_path;  // --config
    std::string preset;       // --preset
    std::string out_dir;      // --out (overrides run.output_dir)
    bool seed_set = false;
    std::uint64_t seed = 0;   // --seed (overrides config)
};

struct ScanArgs {
    int line = 2;                 // mode index to scan
    double span_fwhm = 8.0;       // scan width in units of the linewidth
    int points = 1200;
    double noise = 0.005;
    double delta_t_kelvin = 0.0;  // thermal offset applied before scanning
};

struct CorrelateArgs {
    std::string file_a;
    std::string file_b;
    std::int64_t bin_ps = 84;
    std::int64_t span_ps = 50000;
    bool normalize = false;
    bool background_correct = false;
    bool fit = false;
    int channel_a = 0;
    int channel_b = 1;
};

struct PowerScanArgs {
    std::vector<double> powers_mw{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    double duration_s = 0.0;   // 0 -> run.duration_s
    double window_tau = 8.0;   // coincidence window in units of tau
};

struct FransonArgs {
    std::vector<double> phases_rad;  // empty -> `points` over 1.5 periods
    int points = 13;
    double point_duration_s = 0.0;   // 0 -> run.duration_s
};

int cmd_scan(const CommonArgs& common, const ScanArgs& args);
int cmd_simulate(const CommonArgs& common);
int cmd_correlate(const CommonArgs& common, const CorrelateArgs& args);
int cmd_powerscan(const CommonArgs& common, const PowerScanArgs& args);
int cmd_franson(const CommonArgs& common, const FransonArgs& args);
int cmd_report(const std::string& run_dir);

}  // namespace biphoton::cli
