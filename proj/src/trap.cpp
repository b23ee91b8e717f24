#include "icsim/trap.hpp"

#include <cmath>

#include "icsim/constants.hpp"
#include "icsim/errors.hpp"

namespace icsim {

namespace {
constexpr double two_pi = 2.0 * constants::pi;
} // namespace

IonSpecies IonSpecies::ytterbium_171() {
    // AME2020 atomic mass of 171Yb minus one electron.
    const double mass_amu = 170.9363230 - constants::electron_mass_amu;
    return IonSpecies{
        mass_amu * constants::atomic_mass_unit,
        constants::elementary_charge,
        369.5e-9,
        355.0e-9,
        two_pi * 19.6e6,
    };
}

void IonSpecies::validate() const {
    if (!(mass > 0.0)) throw ValidationError("ion mass must be positive");
    if (!(charge > 0.0)) throw ValidationError("ion charge must be positive");
    if (!(transition_wavelength > 0.0) || !(raman_wavelength > 0.0))
        throw ValidationError("wavelengths must be positive");
    if (!(natural_linewidth > 0.0))
        throw ValidationError("natural linewidth must be positive");
}

void TrapConfig::validate() const {
    if (!(rf_voltage > 0.0)) throw ValidationError("rf voltage must be positive");
    if (dc_voltage < 0.0) throw ValidationError("dc voltage must be non-negative");
    if (!(radial_extent > 0.0) || !(axial_extent > 0.0))
        throw ValidationError("trap dimensions must be positive");
    if (!(drive_frequency > 0.0))
        throw ValidationError("drive frequency must be positive");
    if (!(geometric_factor > 0.0) || geometric_factor > 1.0)
        throw ValidationError("geometric factor must lie in (0, 1]");
    if (radial_asymmetry < 1.0)
        throw ValidationError("radial asymmetry must be >= 1");
}

MathieuCoefficients mathieu_coefficients(const TrapConfig& trap,
                                         const IonSpecies& species) {
    const double m = species.mass;
    const double Q = species.charge;
    const double W2 = trap.drive_frequency * trap.drive_frequency;

    const double a_radial = -4.0 * Q * trap.geometric_factor * trap.dc_voltage /
                            (m * trap.axial_extent * trap.axial_extent * W2);
    const double q_radial = 2.0 * Q * trap.rf_voltage /
                            (m * trap.radial_extent * trap.radial_extent * W2);

    return MathieuCoefficients{a_radial, a_radial, -2.0 * a_radial, q_radial,
                               -q_radial};
}

SecularFrequencies secular_frequencies(const TrapConfig& trap,
                                       const IonSpecies& species) {
    const MathieuCoefficients c = mathieu_coefficients(trap, species);
    const double half_drive = 0.5 * trap.drive_frequency;

    const double s = c.a_x + 0.5 * c.q_x * c.q_x; // degenerate beta^2
    if (s <= 0.0)
        throw UnstableTrap("radial a + q^2/2 <= 0: no radial confinement");
    if (c.a_z < 0.0)
        throw UnstableTrap("a_z < 0: axially anti-trapped");

    const double eps2 = trap.radial_asymmetry * trap.radial_asymmetry;
    const double da = s * (eps2 - 1.0) / (eps2 + 1.0);

    const double beta_x = std::sqrt(s + da);
    const double beta_y = std::sqrt(s - da);

    SecularFrequencies f{};
    f.omega_x = beta_x * half_drive;
    f.omega_y = beta_y * half_drive;
    f.omega_z = std::sqrt(c.a_z) * half_drive;
    f.beta_x = beta_x;
    f.beta_y = beta_y;
    f.omega_r = std::max(f.omega_x, f.omega_y);
    f.alpha = f.omega_z / f.omega_r;
    return f;
}

std::pair<double, double>
secular_frequencies_closed_form(const TrapConfig& trap,
                                const IonSpecies& species) {
    const MathieuCoefficients c = mathieu_coefficients(trap, species);
    const double Q_over_m = species.charge / species.mass;
    const double radial_radicand =
        Q_over_m * (c.q_x * trap.rf_voltage /
                        (4.0 * trap.radial_extent * trap.radial_extent) -
                    trap.geometric_factor * trap.dc_voltage /
                        (trap.axial_extent * trap.axial_extent));
    const double axial_radicand =
        Q_over_m * 2.0 * trap.geometric_factor * trap.dc_voltage /
        (trap.axial_extent * trap.axial_extent);
    if (radial_radicand <= 0.0)
        throw UnstableTrap("radial pseudopotential radicand <= 0");
    return {std::sqrt(radial_radicand), std::sqrt(axial_radicand)};
}

double dc_voltage_for_axial_frequency(double omega_z, const TrapConfig& trap,
                                      const IonSpecies& species) {
    // omega_z^2 = 2 Q kappa U0 / (m z0^2)
    return species.mass * omega_z * omega_z * trap.axial_extent *
           trap.axial_extent / (2.0 * species.charge * trap.geometric_factor);
}

double rf_voltage_for_mathieu_q(double q, const TrapConfig& trap,
                                const IonSpecies& species) {
    return q * species.mass * trap.radial_extent * trap.radial_extent *
           trap.drive_frequency * trap.drive_frequency /
           (2.0 * species.charge);
}

double dc_voltage_for_alpha(double alpha, const TrapConfig& trap,
                            const IonSpecies& species) {
    // a_z = k U0, a_x = -k U0 / 2, omega_x^2 = (W/2)^2 g (q^2/2 - k U0/2)
    // with g = 2 eps^2 / (eps^2 + 1); alpha^2 = a_z / (g s) solves to
    //   U0 = alpha^2 g q^2 / (k (2 + alpha^2 g)).
    TrapConfig unit = trap;
    unit.dc_voltage = 1.0;
    const MathieuCoefficients c = mathieu_coefficients(unit, species);
    const double k = c.a_z; // a_z per volt
    const double eps2 = trap.radial_asymmetry * trap.radial_asymmetry;
    const double g = 2.0 * eps2 / (eps2 + 1.0);
    const double a2g = alpha * alpha * g;
    return a2g * c.q_x * c.q_x / (k * (2.0 + a2g));
}

double single_ion_trajectory(double a, double q, double drive_frequency,
                             double amplitude, double secular_phase, double t,
                             double beta_override) {
    const double beta =
        beta_override > 0.0 ? beta_override : std::sqrt(a + 0.5 * q * q);
    const double omega = 0.5 * beta * drive_frequency;
    const double wt = omega * t + secular_phase;
    const double Wt = drive_frequency * t;
    return amplitude *
           (std::cos(wt) * (1.0 + 0.5 * q * std::cos(Wt) +
                            q * q / 32.0 * std::cos(2.0 * Wt)) +
            beta * 0.5 * q * std::sin(wt) * std::sin(Wt));
}

bool mathieu_solution_valid(double a, double q) {
    return std::abs(a) < q * q && q * q < 0.1;
}

double lamb_dicke(const IonSpecies& species, double beam_half_angle,
                  double omega) {
    if (!(omega > 0.0)) throw ValidationError("mode frequency must be positive");
    const double k = two_pi / species.raman_wavelength;
    return 2.0 * std::sin(beam_half_angle) * k *
           std::sqrt(constants::hbar / (2.0 * species.mass * omega));
}

MicromotionAmplitudes micromotion_amplitude(double q, double radial_distance) {
    return MicromotionAmplitudes{0.5 * q * radial_distance,
                                 q * q / 32.0 * radial_distance};
}

double micromotion_scaling_estimate(double q, double spacing, int n_ions) {
    return 0.25 * q * spacing * std::sqrt(static_cast<double>(n_ions));
}

} // namespace icsim
