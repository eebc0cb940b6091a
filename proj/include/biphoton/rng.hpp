#pragma once

// Seeded randomness for the simulation pipeline.
//
// Every stochastic stage draws from an Rng seeded through derive_seed(), so a
// run is fully determined by the single seed in its config.  The samplers are
// written out explicitly (instead of <random> distributions) so that the
// produced event streams are reproducible across standard library versions.

#include <cmath>
#include <cstdint>
#include <random>

#include "biphoton/units.hpp"

namespace biphoton {

// Stage tags for per-stage seed derivation (see derive_seed).
enum class SeedStage : std::uint32_t {
    pairs = 1,
    detect_signal = 2,
    detect_idler = 3,
    scan_noise = 4,
    hbt_split = 5,
    franson_route = 6,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stage seed = splitmix64(splitmix64(base + stage) + index).  `index` is used
// for per-point seeds inside scans (phase points, power steps, ...).
inline std::uint64_t derive_seed(std::uint64_t base, SeedStage stage, std::uint64_t index = 0) {
    return splitmix64(splitmix64(base + static_cast<std::uint64_t>(stage)) + index);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t raw() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform() < p; }

    double exponential(double mean) {
        return -mean * std::log1p(-uniform());
    }

    double gaussian() {
        double r = std::sqrt(-2.0 * std::log1p(-uniform()));
        return r * std::cos(2.0 * kPi * uniform());
    }

    // Both Box-Muller values; one call per complex sample in the OU update.
    void gaussian_pair(double& g0, double& g1) {
        double r = std::sqrt(-2.0 * std::log1p(-uniform()));
        double phi = 2.0 * kPi * uniform();
        g0 = r * std::cos(phi);
        g1 = r * std::sin(phi);
    }

    std::uint64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean > 30.0) {
            // Split large means; counts of independent halves add.
            std::uint64_t a = poisson(mean / 2.0);
            return a + poisson(mean - mean / 2.0);
        }
        double limit = std::exp(-mean);
        double prod = uniform();
        std::uint64_t n = 0;
        while (prod > limit) {
            prod *= uniform();
            ++n;
        }
        return n;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace biphoton
