#include "biphoton/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "biphoton/kernels.hpp"

namespace biphoton {

namespace {

// The normal matrices here mix parameter units spanning many decades (Hz
// against dimensionless depths), so both solvers first rescale to a unit
// diagonal before eliminating; rank deficiency is then a scaled pivot test.

bool raw_solve(std::vector<double>& a, std::vector<double>& b, std::size_t k,
               std::vector<double>& x) {
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        double best = std::fabs(a[col * k + col]);
        for (std::size_t r = col + 1; r < k; ++r) {
            const double v = std::fabs(a[r * k + col]);
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (!(best > 1e-13) || !std::isfinite(best)) return false;
        if (pivot != col) {
            for (std::size_t c = 0; c < k; ++c) std::swap(a[col * k + c], a[pivot * k + c]);
            std::swap(b[col], b[pivot]);
        }
        const double inv = 1.0 / a[col * k + col];
        for (std::size_t r = col + 1; r < k; ++r) {
            const double f = a[r * k + col] * inv;
            if (f == 0.0) continue;
            for (std::size_t c = col; c < k; ++c) a[r * k + c] -= f * a[col * k + c];
            b[r] -= f * b[col];
        }
    }
    x.assign(k, 0.0);
    for (std::size_t ri = k; ri-- > 0;) {
        double acc = b[ri];
        for (std::size_t c = ri + 1; c < k; ++c) acc -= a[ri * k + c] * x[c];
        x[ri] = acc / a[ri * k + ri];
    }
    return true;
}

bool diagonal_scales(const std::vector<double>& a, std::size_t k, std::vector<double>& s) {
    s.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double d = a[i * k + i];
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        s[i] = std::sqrt(d);
    }
    return true;
}

// Solve A x = b for SPD-structured A (normal equations), diagonally scaled.
bool solve_linear(const std::vector<double>& a, const std::vector<double>& b, std::size_t k,
                  std::vector<double>& x) {
    std::vector<double> s;
    if (!diagonal_scales(a, k, s)) return false;
    std::vector<double> as(k * k), bs(k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) as[i * k + j] = a[i * k + j] / (s[i] * s[j]);
        bs[i] = b[i] / s[i];
    }
    if (!raw_solve(as, bs, k, x)) return false;
    for (std::size_t i = 0; i < k; ++i) x[i] /= s[i];
    return true;
}

// Inverse of an SPD-structured matrix via scaled Gauss-Jordan.
bool invert_matrix(const std::vector<double>& a_in, std::size_t k, std::vector<double>& inv) {
    std::vector<double> s;
    if (!diagonal_scales(a_in, k, s)) return false;
    std::vector<double> a(k * k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) a[i * k + j] = a_in[i * k + j] / (s[i] * s[j]);

    inv.assign(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i) inv[i * k + i] = 1.0;
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        double best = std::fabs(a[col * k + col]);
        for (std::size_t r = col + 1; r < k; ++r) {
            const double v = std::fabs(a[r * k + col]);
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (!(best > 1e-13) || !std::isfinite(best)) return false;
        if (pivot != col) {
            for (std::size_t c = 0; c < k; ++c) {
                std::swap(a[col * k + c], a[pivot * k + c]);
                std::swap(inv[col * k + c], inv[pivot * k + c]);
            }
        }
        const double piv = 1.0 / a[col * k + col];
        for (std::size_t c = 0; c < k; ++c) {
            a[col * k + c] *= piv;
            inv[col * k + c] *= piv;
        }
        for (std::size_t r = 0; r < k; ++r) {
            if (r == col) continue;
            const double f = a[r * k + col];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < k; ++c) {
                a[r * k + c] -= f * a[col * k + c];
                inv[r * k + c] -= f * inv[col * k + c];
            }
        }
    }
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) inv[i * k + j] /= s[i] * s[j];
    return true;
}

double weighted_chi2(const BatchModel& model, const DataSet& data,
                     std::span<const double> params, std::vector<double>& scratch) {
    const std::size_t n = data.x.size();
    scratch.resize(n);
    model(params, data.x, scratch);
    double chi2 = 0.0;
    if (data.sigma.empty()) {
        for (std::size_t i = 0; i < n; ++i) {
            const double r = data.y[i] - scratch[i];
            chi2 += r * r;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double r = (data.y[i] - scratch[i]) / data.sigma[i];
            chi2 += r * r;
        }
    }
    return chi2;
}

double param_scale(std::span<const double> params, std::span<const double> scales,
                   std::size_t j) {
    const double s = j < scales.size() ? scales[j] : 1.0;
    return std::max(std::fabs(params[j]), s);
}

FitResult flagged_failure(std::vector<std::string> names, std::vector<double> params,
                          std::size_t n_points) {
    FitResult res;
    res.names = std::move(names);
    res.params = std::move(params);
    res.stderrs.assign(res.params.size(), 0.0);
    res.n_points = n_points;
    res.n_fitted = res.params.size();
    res.converged = false;
    return res;
}

}  // namespace

double FitResult::param(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return params[i];
    throw std::out_of_range("FitResult: unknown parameter " + name);
}

double FitResult::stderr_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return stderrs[i];
    throw std::out_of_range("FitResult: unknown parameter " + name);
}

void FitResult::add_derived(const std::string& name, double value, double stderr_value) {
    names.push_back(name);
    params.push_back(value);
    stderrs.push_back(stderr_value);
}

std::string to_json_string(const FitResult& result) {
    std::ostringstream os;
    char buf[64];
    auto num = [&buf](double v) -> const char* {
        if (std::isfinite(v)) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
        } else {
            std::snprintf(buf, sizeof(buf), "%s", v > 0 ? "1e308" : "-1e308");
        }
        return buf;
    };
    os << "{\n  \"params\": {";
    for (std::size_t i = 0; i < result.names.size(); ++i)
        os << (i ? ", " : "") << '"' << result.names[i] << "\": " << num(result.params[i]);
    os << "},\n  \"stderr\": {";
    for (std::size_t i = 0; i < result.names.size(); ++i)
        os << (i ? ", " : "") << '"' << result.names[i] << "\": " << num(result.stderrs[i]);
    os << "},\n  \"residual_norm\": " << num(result.residual_norm);
    os << ",\n  \"chi2_reduced\": " << num(result.chi2_reduced);
    os << ",\n  \"iterations\": " << result.iterations;
    os << ",\n  \"converged\": " << (result.converged ? "true" : "false");
    os << "\n}\n";
    return os.str();
}

std::vector<double> numeric_jacobian(const BatchModel& model, const DataSet& data,
                                     std::span<const double> params,
                                     std::span<const double> scales,
                                     double rel_step, bool central) {
    const std::size_t n = data.x.size();
    const std::size_t k = params.size();
    std::vector<double> jac(n * k);
    std::vector<double> base(n), bumped(n), lower(n);
    std::vector<double> p(params.begin(), params.end());
    if (!central) model(p, data.x, base);
    for (std::size_t j = 0; j < k; ++j) {
        const double h = rel_step * param_scale(params, scales, j);
        const double saved = p[j];
        p[j] = saved + h;
        model(p, data.x, bumped);
        if (central) {
            p[j] = saved - h;
            model(p, data.x, lower);
        }
        p[j] = saved;
        const double denom = central ? 2.0 * h : h;
        for (std::size_t i = 0; i < n; ++i) {
            const double df = bumped[i] - (central ? lower[i] : base[i]);
            const double sigma = data.sigma.empty() ? 1.0 : data.sigma[i];
            // residual r_i = (y_i - f_i)/sigma_i, so dr/dp = -df/dp / sigma
            jac[i * k + j] = -df / (denom * sigma);
        }
    }
    return jac;
}

FitResult least_squares(const BatchModel& model, const DataSet& data,
                        std::vector<double> init, std::vector<std::string> names,
                        const FitOptions& options) {
    const std::size_t n = data.x.size();
    const std::size_t k = init.size();
    if (names.size() != k)
        throw std::invalid_argument("least_squares: names/init size mismatch");
    if (n != data.y.size() || (!data.sigma.empty() && data.sigma.size() != n))
        throw std::invalid_argument("least_squares: data column size mismatch");
    if (n < std::max<std::size_t>(8, 2 * k))
        throw std::invalid_argument("least_squares: too few data points");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(data.x[i]) || !std::isfinite(data.y[i]))
            throw std::invalid_argument("least_squares: non-finite data");
        if (!data.sigma.empty() && !(data.sigma[i] > 0.0 && std::isfinite(data.sigma[i])))
            throw std::invalid_argument("least_squares: sigmas must be positive");
    }

    FitResult res;
    res.names = std::move(names);
    res.params = std::move(init);
    res.stderrs.assign(k, 0.0);
    res.n_points = n;
    res.n_fitted = k;

    std::vector<double> scratch;
    double chi2 = weighted_chi2(model, data, res.params, scratch);
    if (!std::isfinite(chi2))
        throw std::invalid_argument("least_squares: model not finite at initial point");
    res.residual_trace.push_back(std::sqrt(chi2));

    std::vector<double> jac, a(k * k), grad(k), step, trial(k);
    double lambda = options.lambda0;
    bool singular = false;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        res.iterations = iter + 1;
        jac = numeric_jacobian(model, data, res.params, options.scales,
                               options.jacobian_step, false);

        // normal matrix and gradient: A = J^T J, g = J^T r
        std::vector<double> resid(n);
        model(res.params, data.x, scratch);
        for (std::size_t i = 0; i < n; ++i) {
            const double sigma = data.sigma.empty() ? 1.0 : data.sigma[i];
            resid[i] = (data.y[i] - scratch[i]) / sigma;
        }
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t q = p; q < k; ++q) {
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) acc += jac[i * k + p] * jac[i * k + q];
                a[p * k + q] = acc;
                a[q * k + p] = acc;
            }
            double g = 0.0;
            for (std::size_t i = 0; i < n; ++i) g += jac[i * k + p] * resid[i];
            grad[p] = g;
        }

        bool accepted = false;
        while (true) {
            std::vector<double> damped = a;
            for (std::size_t p = 0; p < k; ++p) damped[p * k + p] += lambda * a[p * k + p];
            std::vector<double> rhs(k);
            for (std::size_t p = 0; p < k; ++p) rhs[p] = -grad[p];
            if (!solve_linear(damped, rhs, k, step)) {
                singular = true;
                break;
            }
            double rel_step = 0.0;
            for (std::size_t p = 0; p < k; ++p)
                rel_step = std::max(
                    rel_step, std::fabs(step[p]) / param_scale(res.params, options.scales, p));
            if (rel_step < options.step_tolerance) {
                // the solver cannot move the parameters any further
                res.converged = true;
                break;
            }
            for (std::size_t p = 0; p < k; ++p) trial[p] = res.params[p] + step[p];
            const double trial_chi2 = weighted_chi2(model, data, trial, scratch);
            if (std::isfinite(trial_chi2) && trial_chi2 <= chi2) {
                res.params = trial;
                chi2 = trial_chi2;
                lambda = std::max(lambda / options.lambda_factor, 1e-14);
                accepted = true;
                res.residual_trace.push_back(std::sqrt(chi2));
                break;
            }
            lambda *= options.lambda_factor;
            if (lambda > 1e14) break;
        }

        if (singular || res.converged) break;
        if (!accepted) break;  // damping exhausted without improvement
    }

    // No parameter moved enough to matter but the loop ran out: treat a
    // residual already at the floor as converged.
    if (!res.converged && !singular && res.residual_trace.size() >= 2) {
        const double last = res.residual_trace.back();
        const double prev = res.residual_trace[res.residual_trace.size() - 2];
        if (last == 0.0 || prev - last <= 1e-12 * std::max(1.0, prev)) res.converged = true;
    }

    // Undamped Gauss-Newton polish: the small-step exit leaves an O(lambda)
    // offset from the optimum, which matters for near-linear models.
    if (res.converged && !singular) {
        for (int polish = 0; polish < 2; ++polish) {
            jac = numeric_jacobian(model, data, res.params, options.scales,
                                   options.jacobian_step, false);
            std::vector<double> resid(n);
            model(res.params, data.x, scratch);
            for (std::size_t i = 0; i < n; ++i) {
                const double sigma = data.sigma.empty() ? 1.0 : data.sigma[i];
                resid[i] = (data.y[i] - scratch[i]) / sigma;
            }
            for (std::size_t p = 0; p < k; ++p) {
                for (std::size_t q = p; q < k; ++q) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < n; ++i) acc += jac[i * k + p] * jac[i * k + q];
                    a[p * k + q] = acc;
                    a[q * k + p] = acc;
                }
                double g = 0.0;
                for (std::size_t i = 0; i < n; ++i) g += jac[i * k + p] * resid[i];
                grad[p] = g;
            }
            std::vector<double> rhs(k);
            for (std::size_t p = 0; p < k; ++p) rhs[p] = -grad[p];
            if (!solve_linear(a, rhs, k, step)) break;
            for (std::size_t p = 0; p < k; ++p) trial[p] = res.params[p] + step[p];
            const double trial_chi2 = weighted_chi2(model, data, trial, scratch);
            if (!std::isfinite(trial_chi2) || trial_chi2 > chi2 * (1.0 + 1e-12)) break;
            res.params = trial;
            chi2 = std::min(trial_chi2, chi2);
            res.residual_trace.push_back(std::sqrt(chi2));
        }
    }

    res.residual_norm = std::sqrt(chi2);
    res.chi2_reduced = chi2 / static_cast<double>(n - k);

    jac = numeric_jacobian(model, data, res.params, options.scales, options.jacobian_step, false);
    for (std::size_t p = 0; p < k; ++p) {
        for (std::size_t q = p; q < k; ++q) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += jac[i * k + p] * jac[i * k + q];
            a[p * k + q] = acc;
            a[q * k + p] = acc;
        }
    }
    std::vector<double> cov;
    if (invert_matrix(a, k, cov)) {
        res.covariance = cov;
        for (std::size_t p = 0; p < k; ++p)
            res.stderrs[p] = cov[p * k + p] > 0.0 ? std::sqrt(cov[p * k + p]) : 0.0;
    } else {
        res.converged = false;
    }
    return res;
}

FitResult fit_lorentzian(const TransmissionScan& scan) {
    const std::size_t n = scan.freq_hz.size();
    if (n < 16) throw std::invalid_argument("fit_lorentzian: too few scan points");

    const double nu_mid = 0.5 * (scan.freq_hz.front() + scan.freq_hz.back());
    DataSet data;
    data.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) data.x[i] = scan.freq_hz[i] - nu_mid;
    data.y = scan.transmission;

    // wing statistics from the outer eighths
    const std::size_t wing = std::max<std::size_t>(2, n / 8);
    double wing_mean = 0.0;
    for (std::size_t i = 0; i < wing; ++i) wing_mean += data.y[i] + data.y[n - 1 - i];
    wing_mean /= static_cast<double>(2 * wing);
    double wing_var = 0.0;
    for (std::size_t i = 0; i < wing; ++i) {
        const double a = data.y[i] - wing_mean;
        const double b = data.y[n - 1 - i] - wing_mean;
        wing_var += a * a + b * b;
    }
    const double noise = std::sqrt(wing_var / static_cast<double>(2 * wing));

    const std::size_t min_idx = static_cast<std::size_t>(
        std::min_element(data.y.begin(), data.y.end()) - data.y.begin());
    const double depth0 = wing_mean - data.y[min_idx];

    std::vector<std::string> names{"center_hz", "fwhm_hz", "depth", "baseline"};
    if (!(depth0 > 3.0 * noise) || depth0 <= 0.0) {
        auto res = flagged_failure(std::move(names),
                                   {data.x[min_idx] + nu_mid, 0.0, depth0, wing_mean}, n);
        return res;
    }

    // amplitude noise taken from the wings
    data.sigma.assign(n, std::max(noise, 1e-9));

    // half-depth crossings around the minimum
    const double half_level = wing_mean - 0.5 * depth0;
    std::size_t left = min_idx, right = min_idx;
    while (left > 0 && data.y[left - 1] < half_level) --left;
    while (right + 1 < n && data.y[right + 1] < half_level) ++right;
    double fwhm0 = data.x[right] - data.x[left];
    const double step_hz = (data.x.back() - data.x.front()) / static_cast<double>(n - 1);
    fwhm0 = std::max(fwhm0, step_hz);

    BatchModel model = [](std::span<const double> p, std::span<const double> x,
                          std::span<double> y) {
        kernels::lorentzian_dip(x.data(), y.data(), x.size(), p[0], std::fabs(p[1]), p[2], p[3]);
    };

    FitOptions options;
    options.scales = {fwhm0, fwhm0, std::max(depth0, 1e-3), 1.0};
    FitResult res = least_squares(model, data, {data.x[min_idx], fwhm0, depth0, wing_mean},
                                  std::move(names), options);
    res.params[0] += nu_mid;
    res.params[1] = std::fabs(res.params[1]);
    const double q_loaded = res.params[0] / res.params[1];
    const double q_stderr = q_loaded * res.stderrs[1] / res.params[1];
    res.add_derived("q_loaded", q_loaded, q_stderr);
    return res;
}

FitResult fit_double_exponential(const Histogram& h) {
    const std::size_t n = h.counts.size();
    if (n < 32) throw std::invalid_argument("fit_double_exponential: too few bins");

    DataSet data;
    data.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) data.x[i] = static_cast<double>(h.delay_ps(i));
    data.y = h.counts;
    data.sigma.resize(n);
    if (h.normalized) {
        const double denom = h.rate_a * h.rate_b *
                             static_cast<double>(h.bin_width_ps) * 1e-12 * h.acquisition_s;
        for (std::size_t i = 0; i < n; ++i)
            data.sigma[i] = std::sqrt(std::max(data.y[i] * denom, 1.0)) / denom;
    } else {
        for (std::size_t i = 0; i < n; ++i) data.sigma[i] = std::sqrt(std::max(data.y[i], 1.0));
    }

    const std::size_t wing = std::max<std::size_t>(4, n / 8);
    double bg0 = 0.0;
    for (std::size_t i = 0; i < wing; ++i) bg0 += data.y[i] + data.y[n - 1 - i];
    bg0 /= static_cast<double>(2 * wing);
    double wing_var = 0.0;
    for (std::size_t i = 0; i < wing; ++i) {
        const double a = data.y[i] - bg0;
        const double b = data.y[n - 1 - i] - bg0;
        wing_var += a * a + b * b;
    }
    const double noise = std::sqrt(wing_var / static_cast<double>(2 * wing));

    const std::size_t peak_idx = static_cast<std::size_t>(
        std::max_element(data.y.begin(), data.y.end()) - data.y.begin());
    const double amp0 = data.y[peak_idx] - bg0;
    const double snr = amp0 / std::max(noise, 1e-300);

    std::vector<std::string> names{"background", "amplitude", "center_ps", "tau_ps"};
    if (!(snr > 5.0) || amp0 <= 0.0)
        return flagged_failure(std::move(names), {bg0, amp0, data.x[peak_idx], 0.0}, n);

    const double half_level = bg0 + 0.5 * amp0;
    std::size_t left = peak_idx, right = peak_idx;
    while (left > 0 && data.y[left - 1] > half_level) --left;
    while (right + 1 < n && data.y[right + 1] > half_level) ++right;
    const double bin = static_cast<double>(h.bin_width_ps);
    double tau0 = (static_cast<double>(right - left) + 1.0) * bin / (2.0 * std::log(2.0));
    tau0 = std::max(tau0, 0.5 * bin);

    BatchModel model = [](std::span<const double> p, std::span<const double> x,
                          std::span<double> y) {
        kernels::abs_exp_decay(x.data(), y.data(), x.size(), p[2], 1.0 / std::fabs(p[3]),
                               p[1], p[0]);
    };

    FitOptions options;
    options.scales = {std::max(std::fabs(bg0), 0.01 * amp0), amp0, bin, tau0};
    FitResult res = least_squares(model, data, {bg0, amp0, data.x[peak_idx], tau0},
                                  std::move(names), options);
    res.params[3] = std::fabs(res.params[3]);

    const double tau_s = res.params[3] * 1e-12;
    const double dnu = tau_s_to_bandwidth_hz(tau_s);
    const double dnu_stderr = res.params[3] > 0.0 ? dnu * res.stderrs[3] / res.params[3] : 0.0;
    res.add_derived("dnu_hz", dnu, dnu_stderr);
    return res;
}

SinusoidFit fit_sinusoid(std::span<const double> phases_rad, std::span<const double> counts) {
    const std::size_t n = phases_rad.size();
    if (n < 6 || counts.size() != n)
        throw std::invalid_argument("fit_sinusoid: need at least 6 phase points");

    DataSet data;
    data.x.assign(phases_rad.begin(), phases_rad.end());
    data.y.assign(counts.begin(), counts.end());
    data.sigma.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        data.sigma[i] = std::sqrt(std::max(std::fabs(data.y[i]), 1.0));

    // linear prefit y = B + c1 cos(phi) + c2 sin(phi)
    double m[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
    double v[3] = {0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const double w = 1.0 / (data.sigma[i] * data.sigma[i]);
        const double c = std::cos(data.x[i]);
        const double s = std::sin(data.x[i]);
        const double basis[3] = {1.0, c, s};
        for (int p = 0; p < 3; ++p) {
            for (int q = 0; q < 3; ++q) m[p * 3 + q] += w * basis[p] * basis[q];
            v[p] += w * basis[p] * data.y[i];
        }
    }
    std::vector<double> lin;
    if (!solve_linear(std::vector<double>(m, m + 9), std::vector<double>(v, v + 3), 3, lin))
        throw std::invalid_argument("fit_sinusoid: degenerate phase set");
    const double offset0 = lin[0];
    const double amp0 = std::hypot(lin[1], lin[2]);
    const double phase0 = std::atan2(-lin[2], lin[1]);

    SinusoidFit out;
    BatchModel model = [](std::span<const double> p, std::span<const double> x,
                          std::span<double> y) {
        for (std::size_t i = 0; i < x.size(); ++i)
            y[i] = p[0] + p[1] * std::cos(x[i] + p[2]);
    };

    if (amp0 < 1e-12 * std::max(std::fabs(offset0), 1.0)) {
        // No fringe; report the flat solution with the linear-model errors.
        FitResult res;
        res.names = {"offset", "amplitude", "phase0"};
        res.params = {offset0, 0.0, 0.0};
        std::vector<double> cov;
        res.stderrs = {0.0, 0.0, 0.0};
        if (invert_matrix(std::vector<double>(m, m + 9), 3, cov)) {
            res.stderrs[0] = std::sqrt(std::max(cov[0], 0.0));
            res.stderrs[1] = std::sqrt(std::max(cov[4], 0.0));
        }
        res.converged = true;
        res.n_points = n;
        res.n_fitted = 3;
        out.fit = std::move(res);
        out.visibility = 0.0;
        out.visibility_raw = 0.0;
        out.visibility_stderr =
            offset0 > 0.0 ? out.fit.stderrs[1] / offset0 : 0.0;
        out.r_squared = 0.0;
        return out;
    }

    FitOptions options;
    options.scales = {std::max(std::fabs(offset0), 1.0), std::max(amp0, 1.0), 1.0};
    FitResult res = least_squares(model, data, {offset0, amp0, phase0},
                                  {"offset", "amplitude", "phase0"}, options);

    if (res.params[1] < 0.0) {  // fold negative amplitude
        res.params[1] = -res.params[1];
        res.params[2] += kPi;
    }
    while (res.params[2] > kPi) res.params[2] -= 2.0 * kPi;
    while (res.params[2] <= -kPi) res.params[2] += 2.0 * kPi;

    const double offset = res.params[0];
    const double amp = res.params[1];
    out.visibility_raw = offset != 0.0 ? amp / offset : 0.0;
    out.visibility = std::clamp(out.visibility_raw, 0.0, 1.0);
    if (offset > 0.0 && !res.covariance.empty()) {
        const double var_b = res.covariance[0];
        const double var_a = res.covariance[4];
        const double cov_ab = res.covariance[1];
        const double v = out.visibility_raw;
        const double var_v = (var_a + v * v * var_b - 2.0 * v * cov_ab) / (offset * offset);
        out.visibility_stderr = var_v > 0.0 ? std::sqrt(var_v) : 0.0;
    }

    // unweighted R^2 of the fitted fringe
    std::vector<double> fitted(n);
    model(res.params, data.x, fitted);
    double mean_y = 0.0;
    for (double y : data.y) mean_y += y;
    mean_y /= static_cast<double>(n);
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ss_res += (data.y[i] - fitted[i]) * (data.y[i] - fitted[i]);
        ss_tot += (data.y[i] - mean_y) * (data.y[i] - mean_y);
    }
    out.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    out.fit = std::move(res);
    return out;
}

}  // namespace biphoton
