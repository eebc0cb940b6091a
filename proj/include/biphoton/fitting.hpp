#pragma once

// Damped Gauss-Newton (Levenberg-Marquardt) least squares and the three
// model fits used by the analysis: Lorentzian resonance dip, double
// exponential correlation peak, sinusoidal interference fringe.
//
// Solver contract: lambda starts at 1e-3, x10 on a rejected step, /10 on an
// accepted one; forward-difference Jacobian with relative step 1e-6;
// convergence when the relative parameter step drops below 1e-8 (or 200
// iterations).  Parameter standard errors come from the diagonal of the
// inverse weighted normal matrix, treating the supplied sigmas as absolute.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "biphoton/correlation.hpp"
#include "biphoton/resonator.hpp"

namespace biphoton {

// Batch model evaluation: y[i] = f(params, x[i]).
using BatchModel =
    std::function<void(std::span<const double>, std::span<const double>, std::span<double>)>;

struct DataSet {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> sigma;  // empty -> unit weights
};

struct FitOptions {
    double lambda0 = 1e-3;
    double lambda_factor = 10.0;
    double step_tolerance = 1e-8;
    double jacobian_step = 1e-6;
    int max_iterations = 200;
    std::vector<double> scales;  // per-parameter magnitude hints (default 1)
};

struct FitResult {
    std::vector<std::string> names;
    std::vector<double> params;
    std::vector<double> stderrs;
    std::vector<double> covariance;  // k x k row-major, fitted params only
    double residual_norm = 0.0;      // sqrt(weighted chi^2)
    double chi2_reduced = 0.0;
    int iterations = 0;
    bool converged = false;
    std::size_t n_points = 0;
    std::size_t n_fitted = 0;
    std::vector<double> residual_trace;  // residual_norm after each accepted step

    double param(const std::string& name) const;
    double stderr_of(const std::string& name) const;
    // Appends a derived quantity (not part of the fitted parameter set).
    void add_derived(const std::string& name, double value, double stderr_value);
};

std::string to_json_string(const FitResult& result);

FitResult least_squares(const BatchModel& model, const DataSet& data,
                        std::vector<double> init, std::vector<std::string> names,
                        const FitOptions& options = {});

// Forward- or central-difference Jacobian of the weighted residuals,
// d r_i / d p_j with r_i = (y_i - f_i)/sigma_i.  Exposed for verification.
std::vector<double> numeric_jacobian(const BatchModel& model, const DataSet& data,
                                     std::span<const double> params,
                                     std::span<const double> scales,
                                     double rel_step, bool central);

// T(nu) = baseline - depth * (G/2)^2 / ((nu-nu0)^2 + (G/2)^2).
// Params: center_hz, fwhm_hz, depth, baseline.  Flags non-convergence when
// no dip stands out of the noise (depth < 3x wing scatter).
FitResult fit_lorentzian(const TransmissionScan& scan);

// g(dt) = background + amplitude * exp(-|dt-center|/tau); params background,
// amplitude, center_ps, tau_ps plus derived dnu_hz = 1/(2 pi tau).
// Flags non-convergence when the peak SNR is below 5.
FitResult fit_double_exponential(const Histogram& h);

struct SinusoidFit {
    FitResult fit;            // offset, amplitude, phase0
    double visibility = 0.0;  // amplitude/offset clamped to [0,1]
    double visibility_raw = 0.0;
    double visibility_stderr = 0.0;
    double r_squared = 0.0;
};

// N(phi) = offset * (1 + V cos(phi + phase0)), Poisson-weighted.
SinusoidFit fit_sinusoid(std::span<const double> phases_rad, std::span<const double> counts);

}  // namespace biphoton
