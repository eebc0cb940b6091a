#pragma once

// Spectral model of the microring: resonance grid on the FSR ladder,
// all-pass Lorentzian transmission, Q/linewidth relations, thermo-optic
// tuning, and synthetic transmission scans for the fitter.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "biphoton/units.hpp"

namespace biphoton {

struct ResonatorSpec {
    double pump_wavelength_nm = 1551.7;
    double fsr_hz = 200e9;
    double q_intrinsic = 7e7;
    double q_coupling = 2.1e6;
    double radius_um = 115.0;
    double thermo_optic_pm_per_k = 21.90;
    double base_temperature_c = 22.0;

    // 1/Q_L = 1/Qi + 1/Qc
    double q_loaded() const {
        return 1.0 / (1.0 / q_intrinsic + 1.0 / q_coupling);
    }
    double coupling_ratio() const { return q_intrinsic / q_coupling; }
    double pump_frequency_hz() const { return wavelength_nm_to_freq_hz(pump_wavelength_nm); }
    double ring_length_m() const { return 2.0 * kPi * radius_um * 1e-6; }

    void validate() const;  // throws std::invalid_argument
};

struct ResonanceLine {
    double center_hz = 0.0;
    double fwhm_hz = 0.0;
    int mode_index = 0;  // offset from the pump resonance in FSR units

    double center_wavelength_nm() const { return freq_hz_to_wavelength_nm(center_hz); }
};

// 2*max_order+1 lines centered on the pump; line m sits at nu_p + m*FSR, so
// nu(+m) + nu(-m) = 2*nu_p holds exactly.
std::vector<ResonanceLine> resonance_grid(const ResonatorSpec& spec, int max_order);

// All-pass ring dip: T = 1 - (1 - Tmin) * (G/2)^2 / ((nu-nu0)^2 + (G/2)^2).
double lorentzian_transmission(const ResonanceLine& line, double coupling_ratio, double nu_hz);
double lorentzian_min_transmission(double coupling_ratio);

// FWHM linewidth of a resonance at nu0 for a given loaded Q.
double bandwidth_from_q(double nu0_hz, double q_loaded);

// Linear thermo-optic wavelength shift, identical for all lines.
double thermal_shift_pm(const ResonatorSpec& spec, double delta_t_kelvin);

// Shift applied rigidly in wavelength; the equivalent frequency move of a
// line near `wavelength_nm` is |dnu| = (c/lambda^2) * dlambda.
ResonanceLine shifted_line(const ResonanceLine& line, double shift_pm);
double thermal_shift_hz(const ResonatorSpec& spec, double delta_t_kelvin, double wavelength_nm);

struct TransmissionScan {
    std::vector<double> freq_hz;
    std::vector<double> transmission;
};

// Synthetic scan of one resonance; noiseless output equals
// lorentzian_transmission pointwise, Gaussian noise added per point.
TransmissionScan transmission_scan(const ResonatorSpec& spec, const ResonanceLine& line,
                                   double nu_start_hz, double nu_stop_hz, double step_hz,
                                   double noise_rms, std::uint64_t seed);

// Convenience overload scanning the grid line nearest the range center.
TransmissionScan transmission_scan(const ResonatorSpec& spec,
                                   double nu_start_hz, double nu_stop_hz, double step_hz,
                                   double noise_rms, std::uint64_t seed);

// CSV: header `freq_thz,transmission`, 12 significant digits.
void write_scan_csv(const TransmissionScan& scan, std::ostream& os);

}  // namespace biphoton
