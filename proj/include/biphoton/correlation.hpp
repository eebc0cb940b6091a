#pragma once

// Coincidence analysis: cross-correlation histograms via a two-pointer sweep
// over sorted tag streams, g-normalization, flat-background subtraction, the
// Hanbury Brown-Twiss autocorrelation estimator, and windowed coincidence
// counting with the accidental estimate r_a * r_b * window * T.
//
// Bin k (centered layout, odd bin count) covers delays
// [k*b - b/2, k*b + b/2) in ps, i.e. index = floor((delay + b/2) / b).

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "biphoton/tagstream.hpp"

namespace biphoton {

struct Histogram {
    std::int64_t bin_width_ps = 84;
    std::int64_t center_offset_ps = 0;
    std::vector<double> counts;  // odd length, bin (size-1)/2 centered at zero delay
    double acquisition_s = 0.0;
    double rate_a = 0.0;  // singles rates of the two inputs, s^-1
    double rate_b = 0.0;
    bool normalized = false;
    bool background_corrected = false;
    double background_estimate = 0.0;

    std::size_t center_bin() const { return counts.size() / 2; }
    std::int64_t delay_ps(std::size_t k) const {
        return (static_cast<std::int64_t>(k) - static_cast<std::int64_t>(center_bin())) *
                   bin_width_ps +
               center_offset_ps;
    }
    double total() const;
};

Histogram cross_correlate_times(std::span<const std::uint64_t> a,
                                std::span<const std::uint64_t> b,
                                std::int64_t bin_width_ps, std::int64_t span_ps,
                                double acquisition_s);

Histogram cross_correlate(const TagStream& a, std::uint16_t channel_a,
                          const TagStream& b, std::uint16_t channel_b,
                          std::int64_t bin_width_ps, std::int64_t span_ps);

// g[k] = counts[k] / (rate_a * rate_b * bin * T).
Histogram normalize(const Histogram& h);

// Subtracts the flat level estimated from the wings (bins farther than
// 10x the estimated peak width from the peak), clamping at zero.
Histogram background_correct(const Histogram& h);

// Bernoulli beamsplitter + cross-correlation of the two halves, normalized:
// the HBT estimator of g2.  Degenerate splits return an all-zero histogram.
Histogram autocorrelate_hbt(const TagStream& s, std::uint16_t channel,
                            double splitter_ratio, std::int64_t bin_width_ps,
                            std::int64_t span_ps, std::uint64_t seed);
Histogram autocorrelate_hbt_times(std::span<const std::uint64_t> times, double acquisition_s,
                                  double splitter_ratio, std::int64_t bin_width_ps,
                                  std::int64_t span_ps, std::uint64_t seed);

struct CoincidenceResult {
    double coincidences = 0.0;
    double accidentals_estimate = 0.0;
    double car = 0.0;  // (coincidences - accidentals) / accidentals
};

CoincidenceResult coincidence_count(std::span<const std::uint64_t> a,
                                    std::span<const std::uint64_t> b,
                                    double window_ps, double offset_ps,
                                    double acquisition_s);
CoincidenceResult coincidence_count(const TagStream& a, std::uint16_t channel_a,
                                    const TagStream& b, std::uint16_t channel_b,
                                    double window_ps, double offset_ps);

// Mean of the 2*halfwidth+1 bins around zero delay (g2(0) for flat peaks).
double central_mean(const Histogram& h, std::size_t halfwidth_bins);

// CSV: delay_ps,counts,g_normalized.  `normalized` may be null.
void write_histogram_csv(const Histogram& h, const Histogram* normalized, std::ostream& os);

}  // namespace biphoton
