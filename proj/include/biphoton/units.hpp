#pragma once

// Unit conventions used throughout:
//   frequencies in Hz, wavelengths in nm, times in ps unless a suffix says
//   otherwise, optical powers in mW, losses in dB (positive = attenuation).

#include <cmath>

namespace biphoton {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

inline double wavelength_nm_to_freq_hz(double wavelength_nm) {
    return kSpeedOfLight / (wavelength_nm * 1e-9);
}

inline double freq_hz_to_wavelength_nm(double freq_hz) {
    return kSpeedOfLight / freq_hz * 1e9;
}

// Power transmission of a lossy element specified in dB.
inline double loss_db_to_transmission(double loss_db) {
    return std::pow(10.0, -loss_db / 10.0);
}

// FWHM bandwidth <-> 1/e biphoton correlation time.
inline double bandwidth_hz_to_tau_s(double bandwidth_hz) {
    return 1.0 / (2.0 * kPi * bandwidth_hz);
}

inline double tau_s_to_bandwidth_hz(double tau_s) {
    return 1.0 / (2.0 * kPi * tau_s);
}

}  // namespace biphoton
