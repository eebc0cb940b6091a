#include "biphoton/pipeline.hpp"

#include <vector>

#include "biphoton/detection.hpp"
#include "biphoton/pair_source.hpp"

namespace biphoton {

SimulatedStreams simulate_streams(const ExperimentConfig& config) {
    config.validate();
    const double duration_ps = config.run.duration_s * 1e12;

    DetectionPipeline det_signal(config.det_signal, kSignalChannel, duration_ps,
                                 derive_seed(config.run.seed, SeedStage::detect_signal));
    DetectionPipeline det_idler(config.det_idler, kIdlerChannel, duration_ps,
                                derive_seed(config.run.seed, SeedStage::detect_idler));

    PairGenerator gen(config.source, config.run.duration_s, config.run.seed);

    constexpr std::size_t kChunk = 1u << 20;
    std::vector<double> chunk_signal, chunk_idler;
    chunk_signal.reserve(kChunk);
    chunk_idler.reserve(kChunk);

    SimulatedStreams out;
    PairEvent ev;
    while (gen.next(ev)) {
        chunk_signal.push_back(ev.signal_emission_ps());
        chunk_idler.push_back(ev.idler_emission_ps());
        ++out.pairs_generated;
        if (chunk_signal.size() >= kChunk) {
            det_signal.add_emissions(chunk_signal);
            det_idler.add_emissions(chunk_idler);
            chunk_signal.clear();
            chunk_idler.clear();
        }
    }
    det_signal.add_emissions(chunk_signal);
    det_idler.add_emissions(chunk_idler);

    out.signal = det_signal.finalize();
    out.idler = det_idler.finalize();
    out.duration_s = config.run.duration_s;
    return out;
}

}  // namespace biphoton
