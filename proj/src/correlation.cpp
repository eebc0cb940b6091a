#include "biphoton/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "biphoton/kernels.hpp"
#include "biphoton/rng.hpp"

namespace biphoton {

namespace {

std::int64_t floor_div(std::int64_t x, std::int64_t y) {
    std::int64_t q = x / y;
    if ((x % y != 0) && ((x < 0) != (y < 0))) --q;
    return q;
}

}  // namespace

double Histogram::total() const {
    return kernels::sum(counts.data(), counts.size());
}

Histogram cross_correlate_times(std::span<const std::uint64_t> a,
                                std::span<const std::uint64_t> b,
                                std::int64_t bin_width_ps, std::int64_t span_ps,
                                double acquisition_s) {
    if (bin_width_ps <= 0)
        throw std::invalid_argument("cross_correlate: bin width must be positive");
    if (span_ps < bin_width_ps)
        throw std::invalid_argument("cross_correlate: span must be >= bin width");

    const std::int64_t half_bins = span_ps / bin_width_ps;
    Histogram h;
    h.bin_width_ps = bin_width_ps;
    h.counts.assign(static_cast<std::size_t>(2 * half_bins + 1), 0.0);
    h.acquisition_s = acquisition_s;
    h.rate_a = acquisition_s > 0.0 ? static_cast<double>(a.size()) / acquisition_s : 0.0;
    h.rate_b = acquisition_s > 0.0 ? static_cast<double>(b.size()) / acquisition_s : 0.0;

    const std::int64_t reach = half_bins * bin_width_ps + bin_width_ps / 2;
    std::size_t lo = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto ta = static_cast<std::int64_t>(a[i]);
        while (lo < b.size() && static_cast<std::int64_t>(b[lo]) < ta - reach) ++lo;
        for (std::size_t j = lo; j < b.size(); ++j) {
            const std::int64_t d = static_cast<std::int64_t>(b[j]) - ta;
            if (d > reach) break;
            const std::int64_t k = floor_div(d + bin_width_ps / 2, bin_width_ps);
            if (k < -half_bins || k > half_bins) continue;
            h.counts[static_cast<std::size_t>(k + half_bins)] += 1.0;
        }
    }
    return h;
}

Histogram cross_correlate(const TagStream& a, std::uint16_t channel_a,
                          const TagStream& b, std::uint16_t channel_b,
                          std::int64_t bin_width_ps, std::int64_t span_ps) {
    const auto ta = channel_times(a, channel_a);
    const auto tb = channel_times(b, channel_b);
    const double acq = std::max(a.duration_s(), b.duration_s());
    return cross_correlate_times(ta, tb, bin_width_ps, span_ps, acq);
}

Histogram normalize(const Histogram& h) {
    if (!(h.acquisition_s > 0.0))
        throw std::invalid_argument("normalize: zero acquisition time");
    const double denom =
        h.rate_a * h.rate_b * static_cast<double>(h.bin_width_ps) * 1e-12 * h.acquisition_s;
    if (!(denom > 0.0))
        throw std::invalid_argument("normalize: zero singles rate");
    Histogram out = h;
    kernels::scale(h.counts.data(), out.counts.data(), h.counts.size(), 1.0 / denom);
    out.normalized = true;
    return out;
}

Histogram background_correct(const Histogram& h) {
    if (h.counts.empty())
        throw std::invalid_argument("background_correct: empty histogram");

    const std::size_t n = h.counts.size();
    const std::size_t peak_bin =
        static_cast<std::size_t>(std::max_element(h.counts.begin(), h.counts.end()) -
                                 h.counts.begin());
    const double peak = h.counts[peak_bin];

    // Rough floor from the outer quarter of bins, then the half-level width.
    const std::size_t quarter = std::max<std::size_t>(1, n / 8);
    double rough = 0.0;
    for (std::size_t i = 0; i < quarter; ++i) rough += h.counts[i] + h.counts[n - 1 - i];
    rough /= static_cast<double>(2 * quarter);

    const double half_level = rough + 0.5 * (peak - rough);
    std::size_t left = peak_bin;
    while (left > 0 && h.counts[left - 1] > half_level) --left;
    std::size_t right = peak_bin;
    while (right + 1 < n && h.counts[right + 1] > half_level) ++right;
    const std::size_t width_bins = std::max<std::size_t>(1, right - left + 1);

    std::vector<std::size_t> wing;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t dist = i > peak_bin ? i - peak_bin : peak_bin - i;
        if (dist > 10 * width_bins) wing.push_back(i);
    }
    if (wing.size() < 20)
        throw std::invalid_argument("background_correct: fewer than 20 wing bins");

    double bg = 0.0;
    for (std::size_t i : wing) bg += h.counts[i];
    bg /= static_cast<double>(wing.size());

    Histogram out = h;
    for (auto& c : out.counts) c = std::max(0.0, c - bg);
    out.background_corrected = true;
    out.background_estimate = bg;
    return out;
}

Histogram autocorrelate_hbt_times(std::span<const std::uint64_t> times, double acquisition_s,
                                  double splitter_ratio, std::int64_t bin_width_ps,
                                  std::int64_t span_ps, std::uint64_t seed) {
    if (splitter_ratio < 0.0 || splitter_ratio > 1.0)
        throw std::invalid_argument("autocorrelate_hbt: splitter ratio must be in [0,1]");
    Rng rng(derive_seed(seed, SeedStage::hbt_split));
    std::vector<std::uint64_t> half_a, half_b;
    half_a.reserve(times.size() / 2 + 1);
    half_b.reserve(times.size() / 2 + 1);
    for (std::uint64_t t : times)
        (rng.uniform() < splitter_ratio ? half_a : half_b).push_back(t);
    Histogram h = cross_correlate_times(half_a, half_b, bin_width_ps, span_ps, acquisition_s);
    if (h.rate_a * h.rate_b * h.acquisition_s > 0.0) return normalize(h);
    return h;
}

Histogram autocorrelate_hbt(const TagStream& s, std::uint16_t channel,
                            double splitter_ratio, std::int64_t bin_width_ps,
                            std::int64_t span_ps, std::uint64_t seed) {
    const auto times = channel_times(s, channel);
    return autocorrelate_hbt_times(times, s.duration_s(), splitter_ratio, bin_width_ps,
                                   span_ps, seed);
}

CoincidenceResult coincidence_count(std::span<const std::uint64_t> a,
                                    std::span<const std::uint64_t> b,
                                    double window_ps, double offset_ps,
                                    double acquisition_s) {
    if (!(window_ps > 0.0))
        throw std::invalid_argument("coincidence_count: window must be positive");
    CoincidenceResult res;
    const double half = window_ps * 0.5;
    std::size_t lo = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double target = static_cast<double>(a[i]) + offset_ps;
        while (lo < b.size() && static_cast<double>(b[lo]) < target - half) ++lo;
        for (std::size_t j = lo; j < b.size(); ++j) {
            const double d = static_cast<double>(b[j]) - target;
            if (d > half) break;
            if (d >= -half) res.coincidences += 1.0;
        }
    }
    const double rate_a =
        acquisition_s > 0.0 ? static_cast<double>(a.size()) / acquisition_s : 0.0;
    const double rate_b =
        acquisition_s > 0.0 ? static_cast<double>(b.size()) / acquisition_s : 0.0;
    res.accidentals_estimate = rate_a * rate_b * window_ps * 1e-12 * acquisition_s;
    if (res.accidentals_estimate > 0.0) {
        res.car = (res.coincidences - res.accidentals_estimate) / res.accidentals_estimate;
    } else {
        res.car = res.coincidences > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    return res;
}

CoincidenceResult coincidence_count(const TagStream& a, std::uint16_t channel_a,
                                    const TagStream& b, std::uint16_t channel_b,
                                    double window_ps, double offset_ps) {
    const auto ta = channel_times(a, channel_a);
    const auto tb = channel_times(b, channel_b);
    const double acq = std::max(a.duration_s(), b.duration_s());
    return coincidence_count(ta, tb, window_ps, offset_ps, acq);
}

double central_mean(const Histogram& h, std::size_t halfwidth_bins) {
    const std::size_t c = h.center_bin();
    const std::size_t lo = c >= halfwidth_bins ? c - halfwidth_bins : 0;
    const std::size_t hi = std::min(h.counts.size() - 1, c + halfwidth_bins);
    double acc = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) acc += h.counts[i];
    return acc / static_cast<double>(hi - lo + 1);
}

void write_histogram_csv(const Histogram& h, const Histogram* normalized, std::ostream& os) {
    os << "delay_ps,counts,g_normalized\n";
    char buf[120];
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
        const double g = normalized != nullptr ? normalized->counts[k] : 0.0;
        std::snprintf(buf, sizeof(buf), "%lld,%.12g,%.12g\n",
                      static_cast<long long>(h.delay_ps(k)), h.counts[k], g);
        os << buf;
    }
}

}  // namespace biphoton
