#include "biphoton/resonator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "biphoton/kernels.hpp"
#include "biphoton/rng.hpp"

namespace biphoton {

void ResonatorSpec::validate() const {
    if (!(q_intrinsic > 0.0) || !(q_coupling > 0.0))
        throw std::invalid_argument("resonator: Q factors must be positive");
    if (!(fsr_hz > 0.0))
        throw std::invalid_argument("resonator: FSR must be positive");
    if (!(radius_um > 0.0))
        throw std::invalid_argument("resonator: radius must be positive");
    if (!(pump_wavelength_nm > 0.0))
        throw std::invalid_argument("resonator: pump wavelength must be positive");
}

std::vector<ResonanceLine> resonance_grid(const ResonatorSpec& spec, int max_order) {
    spec.validate();
    if (max_order < 1)
        throw std::invalid_argument("resonance_grid: max_order must be >= 1");

    const double nu_p = spec.pump_frequency_hz();
    const double q_l = spec.q_loaded();
    std::vector<ResonanceLine> lines;
    lines.reserve(2 * max_order + 1);
    for (int m = -max_order; m <= max_order; ++m) {
        ResonanceLine line;
        line.mode_index = m;
        line.center_hz = nu_p + static_cast<double>(m) * spec.fsr_hz;
        line.fwhm_hz = bandwidth_from_q(line.center_hz, q_l);
        lines.push_back(line);
    }
    return lines;
}

double lorentzian_min_transmission(double coupling_ratio) {
    double r = (1.0 - coupling_ratio) / (1.0 + coupling_ratio);
    return r * r;
}

double lorentzian_transmission(const ResonanceLine& line, double coupling_ratio, double nu_hz) {
    if (!(coupling_ratio > 0.0))
        throw std::invalid_argument("lorentzian_transmission: coupling ratio must be positive");
    const double t_min = lorentzian_min_transmission(coupling_ratio);
    const double hw = line.fwhm_hz * 0.5;
    const double d = nu_hz - line.center_hz;
    return 1.0 - (1.0 - t_min) * hw * hw / (d * d + hw * hw);
}

double bandwidth_from_q(double nu0_hz, double q_loaded) {
    if (!(q_loaded > 0.0))
        throw std::invalid_argument("bandwidth_from_q: Q must be positive");
    return nu0_hz / q_loaded;
}

double thermal_shift_pm(const ResonatorSpec& spec, double delta_t_kelvin) {
    return spec.thermo_optic_pm_per_k * delta_t_kelvin;
}

ResonanceLine shifted_line(const ResonanceLine& line, double shift_pm) {
    ResonanceLine out = line;
    const double lambda_nm = line.center_wavelength_nm() + shift_pm * 1e-3;
    out.center_hz = wavelength_nm_to_freq_hz(lambda_nm);
    return out;
}

double thermal_shift_hz(const ResonatorSpec& spec, double delta_t_kelvin, double wavelength_nm) {
    const double shift_m = thermal_shift_pm(spec, delta_t_kelvin) * 1e-12;
    const double lambda_m = wavelength_nm * 1e-9;
    return kSpeedOfLight / (lambda_m * lambda_m) * shift_m;
}

TransmissionScan transmission_scan(const ResonatorSpec& spec, const ResonanceLine& line,
                                   double nu_start_hz, double nu_stop_hz, double step_hz,
                                   double noise_rms, std::uint64_t seed) {
    spec.validate();
    if (!(nu_start_hz < nu_stop_hz))
        throw std::invalid_argument("transmission_scan: empty frequency range");
    if (!(step_hz > 0.0))
        throw std::invalid_argument("transmission_scan: step must be positive");
    if (noise_rms < 0.0)
        throw std::invalid_argument("transmission_scan: noise_rms must be >= 0");

    TransmissionScan scan;
    const auto n = static_cast<std::size_t>(std::floor((nu_stop_hz - nu_start_hz) / step_hz)) + 1;
    scan.freq_hz.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        scan.freq_hz[i] = nu_start_hz + static_cast<double>(i) * step_hz;

    const double t_min = lorentzian_min_transmission(spec.coupling_ratio());
    scan.transmission.resize(n);
    kernels::lorentzian_dip(scan.freq_hz.data(), scan.transmission.data(), n,
                            line.center_hz, line.fwhm_hz, 1.0 - t_min, 1.0);

    if (noise_rms > 0.0) {
        Rng rng(derive_seed(seed, SeedStage::scan_noise));
        for (auto& t : scan.transmission) t += noise_rms * rng.gaussian();
    }
    return scan;
}

TransmissionScan transmission_scan(const ResonatorSpec& spec,
                                   double nu_start_hz, double nu_stop_hz, double step_hz,
                                   double noise_rms, std::uint64_t seed) {
    const double center = 0.5 * (nu_start_hz + nu_stop_hz);
    const double offset = (center - spec.pump_frequency_hz()) / spec.fsr_hz;
    const int m = static_cast<int>(std::lround(offset));
    const int order = std::max(1, std::abs(m));
    auto lines = resonance_grid(spec, order);
    const ResonanceLine& line = lines[static_cast<std::size_t>(m + order)];
    return transmission_scan(spec, line, nu_start_hz, nu_stop_hz, step_hz, noise_rms, seed);
}

void write_scan_csv(const TransmissionScan& scan, std::ostream& os) {
    os << "freq_thz,transmission\n";
    char buf[80];
    for (std::size_t i = 0; i < scan.freq_hz.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g\n",
                      scan.freq_hz[i] * 1e-12, scan.transmission[i]);
        os << buf;
    }
}

}  // namespace biphoton
