#pragma once

#include <vector>

#include <Eigen/Core>

#include "icsim/trap.hpp"

namespace icsim {

// 171Yb+ hyperfine ground-state splitting; reference constant only.
inline constexpr double yb171_hyperfine_splitting =
    2.0 * 3.141592653589793 * 12.642821e9; // rad/s

// Power-broadened Lorentzian FWHM Gamma sqrt(1 + s), rad/s.
double lorentz_fwhm(const IonSpecies& species, double saturation);

// Doppler (Gaussian) FWHM for a fluorescence beam at angle theta to the
// crystal plane: 2 sqrt((2 ln 2) k_B / (m lambda^2)) *
// sqrt(T_r cos^2 theta + T_z sin^2 theta), expressed in rad/s.
double doppler_fwhm(double t_radial, double t_axial, double theta,
                    const IonSpecies& species);

struct LineProfile {
    Eigen::VectorXd detunings;   // rad/s around line center
    Eigen::VectorXd intensities; // arbitrary units
    double amplitude = 1.0;      // peak height above background
    double background = 0.0;
    double lorentz_fwhm = 0.0;   // rad/s
    double gauss_fwhm = 0.0;     // rad/s
};

// Synthesized Voigt fluorescence lineshape (peak-normalized amplitude).
LineProfile voigt_profile(const Eigen::VectorXd& grid, double t_radial,
                          double t_axial, double theta,
                          const IonSpecies& species, double saturation,
                          double amplitude = 1.0, double background = 0.0);

struct VoigtFit {
    double t_radial = 0.0;            // K
    double t_radial_uncertainty = 0.0;
    double center = 0.0;              // rad/s
    double amplitude = 0.0;
    double background = 0.0;
    double gauss_fwhm = 0.0;          // rad/s
    bool degenerate = false;          // Gaussian width below grid resolution;
                                      // t_radial is then an upper bound
    double rms_residual = 0.0;
    int iterations = 0;
};

// Least-squares fit of (center, amplitude, background, Gaussian width) at
// fixed Lorentzian width; the radial temperature inverts the Doppler-width
// formula with T_z held at its sideband-measured value.
VoigtFit fit_voigt(const LineProfile& data, double lorentz_width, double theta,
                   double t_axial, const IonSpecies& species);

struct SidebandScan {
    std::vector<double> times; // s
    std::vector<double> red;   // flip probabilities
    std::vector<double> blue;
    double ratio = 0.0; // red/blue early-time amplitude ratio
    double nbar = 0.0;  // ratio / (1 - ratio)
};

// Thermal red/blue sideband flopping curves with Fock truncation at
// max(ceil(nbar + 10 sqrt(nbar+1)), tail < 1e-8).
SidebandScan sideband_flops(double nbar, double eta, double rabi,
                            const std::vector<double>& times);

// Early-time amplitude ratio from a scan (quadratic-plus-quartic fit).
double extract_sideband_ratio(const std::vector<double>& times,
                              const std::vector<double>& red,
                              const std::vector<double>& blue);

// nbar = r / (1 - r); throws InvalidRatio outside [0, 1).
double ratio_to_nbar(double ratio);

struct HeatingConversion {
    double temperature_rate;     // K/s
    double field_noise_density;  // V^2 m^-2 Hz^-1
};

// T_dot = n_dot hbar omega / k_B and S_E = 4 m hbar omega n_dot / Q^2.
HeatingConversion heating_conversions(double quanta_rate, double omega,
                                      const IonSpecies& species);

// Inverse map S_E -> n_dot (exact round trip with heating_conversions).
double quanta_rate_from_field_noise(double field_noise_density, double omega,
                                    const IonSpecies& species);

// Uncorrelated-noise scaling n_dot_k = (omega_com / omega_k) n_dot_com.
double uncorrelated_mode_scaling(double ncom_rate, double omega_com,
                                 double omega_k);

} // namespace icsim
