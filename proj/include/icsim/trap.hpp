#pragma once

#include <utility>

namespace icsim {

// Ion species data. All quantities SI.
struct IonSpecies {
    double mass;                  // kg
    double charge;                // C
    double transition_wavelength; // m, fluorescence/cooling transition
    double raman_wavelength;      // m, stimulated-Raman beams
    double natural_linewidth;     // rad/s

    // 171Yb+ (ion mass; 369.5 nm cooling, 355 nm Raman, Gamma = 2pi x 19.6 MHz)
    static IonSpecies ytterbium_171();

    void validate() const;
};

// Linear Paul trap drive parameters. All quantities SI.
struct TrapConfig {
    double rf_voltage;       // V, amplitude V0 on the rf rod pair
    double dc_voltage;       // V, endcap voltage U0
    double radial_extent;    // m, r0
    double axial_extent;     // m, z0
    double drive_frequency;  // rad/s, Omega_t
    double geometric_factor; // kappa, dimensionless, in (0, 1]
    // omega_x / omega_y imposed on the secular frequencies; >= 1.  Breaks the
    // rotational zero mode of radially symmetric crystals.
    double radial_asymmetry = 1.02;

    void validate() const;
};

// Dimensionless Mathieu parameters of the single-ion equations of motion,
// before the radial-asymmetry split.
struct MathieuCoefficients {
    double a_x; // dc coefficient, x
    double a_y; // equal to a_x
    double a_z; // -2 a_x (source-free static potential)
    double q_x; // rf coefficient, x
    double q_y; // -q_x
};

// Secular frequencies with the asymmetry split applied symmetrically about
// the degenerate radial value: omega_x,y = (Omega_t/2) sqrt(s +- da) with
// s = a + q^2/2 and da = s (eps^2-1)/(eps^2+1), so omega_x/omega_y = eps.
struct SecularFrequencies {
    double omega_x; // rad/s
    double omega_y; // rad/s
    double omega_z; // rad/s
    double beta_x;  // omega_x = beta_x * Omega_t / 2
    double beta_y;
    double omega_r; // Max[omega_x, omega_y]
    double alpha;   // omega_z / omega_r
};

MathieuCoefficients mathieu_coefficients(const TrapConfig& trap,
                                         const IonSpecies& species);

// Throws UnstableTrap when a radicand is non-positive.
SecularFrequencies secular_frequencies(const TrapConfig& trap,
                                       const IonSpecies& species);

// Closed-form degenerate (omega_r, omega_z) pair:
//   omega_r = sqrt((Q/m)(q V0 / (4 r0^2) - kappa U0 / z0^2))
//   omega_z = sqrt((Q/m)(2 kappa U0 / z0^2))
// Algebraically identical to the beta-based values with eps = 1.
std::pair<double, double>
secular_frequencies_closed_form(const TrapConfig& trap,
                                const IonSpecies& species);

// Endcap voltage that produces a target axial frequency.
double dc_voltage_for_axial_frequency(double omega_z, const TrapConfig& trap,
                                      const IonSpecies& species);

// Rod voltage that produces a target Mathieu q (q = q_x).
double rf_voltage_for_mathieu_q(double q, const TrapConfig& trap,
                                const IonSpecies& species);

// Endcap voltage that produces a target aspect ratio alpha = omega_z/omega_r
// at the configured rod voltage.
double dc_voltage_for_alpha(double alpha, const TrapConfig& trap,
                            const IonSpecies& species);

// First-order Mathieu solution for one axis,
//   u(t) = A ( cos(w t + phi) [1 + (q/2) cos(W t) + (q^2/32) cos(2 W t)]
//            + beta (q/2) sin(w t + phi) sin(W t) )
// with beta = sqrt(a + q^2/2) and w = beta W / 2 unless beta_override > 0.
// Valid for |a| < q^2 << 1; see mathieu_solution_valid().
double single_ion_trajectory(double a, double q, double drive_frequency,
                             double amplitude, double secular_phase, double t,
                             double beta_override = 0.0);

bool mathieu_solution_valid(double a, double q);

// Lamb-Dicke parameter for two Raman beams at +-theta about the symmetry
// axis: eta = 2 sin(theta) (2 pi / lambda) sqrt(hbar / (2 m omega)).
double lamb_dicke(const IonSpecies& species, double beam_half_angle,
                  double omega);

struct MicromotionAmplitudes {
    double first_harmonic;  // |r1| = (q/2) r0, m
    double second_harmonic; // |r2| = (q^2/32) r0, m
};

MicromotionAmplitudes micromotion_amplitude(double q, double radial_distance);

// Outer-ion estimate |r1|_max ~ q d sqrt(N) / 4 for spacing d.
double micromotion_scaling_estimate(double q, double spacing, int n_ions);

} // namespace icsim
