#pragma once

// End-to-end simulation: pair generation through the detection chain into
// per-channel tag streams.  Pair events are generated and thinned in chunks
// so multi-minute acquisitions at 1e7+ pairs/s stay within memory.

#include <cstdint>

#include "biphoton/config.hpp"
#include "biphoton/tagstream.hpp"

namespace biphoton {

inline constexpr std::uint16_t kSignalChannel = 0;
inline constexpr std::uint16_t kIdlerChannel = 1;

struct SimulatedStreams {
    TagStream signal;
    TagStream idler;
    std::uint64_t pairs_generated = 0;
    double duration_s = 0.0;
};

SimulatedStreams simulate_streams(const ExperimentConfig& config);

}  // namespace biphoton
