#pragma once

// Independent oracles for the test suites.  These deliberately avoid the
// library's implementation paths: the correlator oracle is a direct O(N^2)
// double loop, the regression oracle solves the normal equations in closed
// form, and the tail probabilities are brute-force series sums.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace oracle {

// O(N^2) correlation histogram, bin k covers [k*b - b/2, k*b + b/2).
inline std::vector<double> brute_force_correlate(std::span<const std::uint64_t> a,
                                                 std::span<const std::uint64_t> b,
                                                 std::int64_t bin_ps, std::int64_t span_ps) {
    const std::int64_t half_bins = span_ps / bin_ps;
    std::vector<double> counts(static_cast<std::size_t>(2 * half_bins + 1), 0.0);
    for (std::uint64_t ta : a) {
        for (std::uint64_t tb : b) {
            const std::int64_t d = static_cast<std::int64_t>(tb) - static_cast<std::int64_t>(ta);
            const std::int64_t shifted = d + bin_ps / 2;
            std::int64_t k = shifted / bin_ps;
            if (shifted % bin_ps != 0 && shifted < 0) --k;
            if (k >= -half_bins && k <= half_bins)
                counts[static_cast<std::size_t>(k + half_bins)] += 1.0;
        }
    }
    return counts;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

// Weighted least squares for y = a*x + b via the closed-form normal equations.
inline LinearFit linear_regression(std::span<const double> x, std::span<const double> y,
                                   std::span<const double> sigma = {}) {
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double w = sigma.empty() ? 1.0 : 1.0 / (sigma[i] * sigma[i]);
        sw += w;
        sx += w * x[i];
        sy += w * y[i];
        sxx += w * x[i] * x[i];
        sxy += w * x[i] * y[i];
    }
    const double denom = sw * sxx - sx * sx;
    LinearFit fit;
    fit.slope = (sw * sxy - sx * sy) / denom;
    fit.intercept = (sxx * sy - sx * sxy) / denom;
    return fit;
}

// Kolmogorov-Smirnov statistic of samples against the Laplace(0, tau) CDF and
// the asymptotic Kolmogorov p-value.
inline double laplace_cdf(double x, double tau) {
    return x < 0.0 ? 0.5 * std::exp(x / tau) : 1.0 - 0.5 * std::exp(-x / tau);
}

inline double ks_statistic_laplace(std::vector<double> samples, double tau) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double cdf = laplace_cdf(samples[i], tau);
        d = std::max(d, std::fabs(cdf - static_cast<double>(i) / n));
        d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - cdf));
    }
    return d;
}

inline double ks_p_value(double d, std::size_t n) {
    const double lambda = (std::sqrt(static_cast<double>(n)) + 0.12 +
                           0.11 / std::sqrt(static_cast<double>(n))) *
                          d;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * lambda * lambda);
        p += term;
        if (std::fabs(term) < 1e-12) break;
    }
    return std::min(std::max(p, 0.0), 1.0);
}

// P(n >= 2) by brute-force series.
inline double poisson_tail_ge2(double mu, int n_max = 50) {
    double p0 = std::exp(-mu);
    double total = 0.0;
    double term = p0;
    for (int n = 0; n <= n_max; ++n) {
        if (n >= 2) total += term;
        term *= mu / static_cast<double>(n + 1);
    }
    return total;
}

inline double geometric_tail_ge2(double mu, int n_max = 50) {
    double total = 0.0;
    for (int n = 2; n <= n_max; ++n)
        total += std::pow(mu, n) / std::pow(1.0 + mu, n + 1);
    return total;
}

}  // namespace oracle
