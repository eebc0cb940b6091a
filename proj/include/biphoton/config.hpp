#pragma once

// Experiment configuration: JSON schema, preset lookup, and the derivations
// that tie the sub-specs together (loaded Q -> tau, ring length from radius).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "biphoton/detection.hpp"
#include "biphoton/franson.hpp"
#include "biphoton/pair_source.hpp"
#include "biphoton/resonator.hpp"

namespace biphoton {

struct RunSpec {
    double duration_s = 1.0;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
};

struct ExperimentConfig {
    ResonatorSpec resonator;
    SourceSpec source;
    DetectorSpec det_signal;
    DetectorSpec det_idler;
    std::optional<FransonSpec> franson;
    EntangledStateModel state;
    RunSpec run;

    void validate() const;
};

// Parse/serialize the JSON schema described in the README.  Unknown keys are
// rejected so typos in configs fail loudly.  BIPHOTON_SEED (env) overrides
// run.seed when set.
ExperimentConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ExperimentConfig& config);

ExperimentConfig load_config_file(const std::filesystem::path& path);

// Preset lookup: $BIPHOTON_PRESET_DIR, then ./presets, then the source tree.
std::filesystem::path preset_path(const std::string& name);
ExperimentConfig load_preset(const std::string& name);

}  // namespace biphoton
