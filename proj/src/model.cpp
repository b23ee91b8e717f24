#include "icsim/model.hpp"

#include <cmath>

#include "icsim/constants.hpp"
#include "icsim/errors.hpp"

namespace icsim {

const char* to_string(Method m) {
    return m == Method::Pseudopotential ? "pseudopotential" : "floquet";
}

PotentialModel pseudo_model(const TrapConfig& trap, const IonSpecies& species,
                            int n_ions) {
    const SecularFrequencies f = secular_frequencies(trap, species);
    return PotentialModel{f.omega_x, f.omega_y, f.omega_z, species, n_ions};
}

double length_scale(const PotentialModel& model) {
    const double w = model.omega_r();
    const double kq2 = constants::coulomb_constant * model.species.charge *
                       model.species.charge;
    return std::cbrt(kq2 / (model.species.mass * w * w));
}

double energy_scale(const PotentialModel& model) {
    const double kq2 = constants::coulomb_constant * model.species.charge *
                       model.species.charge;
    return kq2 / length_scale(model);
}

double RfModel::rf_period() const {
    return 2.0 * constants::pi / drive_frequency;
}

PotentialModel RfModel::pseudo(int n_ions) const {
    const double half = 0.5 * drive_frequency;
    Eigen::Vector3d w;
    for (int i = 0; i < 3; ++i) {
        const double s = a[i] + 0.5 * q[i] * q[i];
        if (s < 0.0)
            throw UnstableTrap("a + q^2/2 < 0 along one axis");
        w[i] = half * std::sqrt(s);
    }
    return PotentialModel{w[0], w[1], w[2], species, n_ions};
}

RfModel rf_model(const TrapConfig& trap, const IonSpecies& species) {
    const MathieuCoefficients c = mathieu_coefficients(trap, species);
    const double s = c.a_x + 0.5 * c.q_x * c.q_x;
    const double eps2 = trap.radial_asymmetry * trap.radial_asymmetry;
    const double da = s * (eps2 - 1.0) / (eps2 + 1.0);
    RfModel m;
    m.a = Eigen::Vector3d(c.a_x + da, c.a_y - da, c.a_z);
    m.q = Eigen::Vector3d(c.q_x, c.q_y, 0.0);
    m.drive_frequency = trap.drive_frequency;
    m.species = species;
    return m;
}

RfModel rf_model_matching(const PotentialModel& model,
                          double drive_frequency) {
    const double f = 2.0 / drive_frequency;
    const double bx2 = f * f * model.omega_x * model.omega_x;
    const double by2 = f * f * model.omega_y * model.omega_y;
    const double bz2 = f * f * model.omega_z * model.omega_z;
    const double q = std::sqrt(bx2 + by2 + bz2);
    RfModel m;
    m.a = Eigen::Vector3d(bx2 - 0.5 * q * q, by2 - 0.5 * q * q, bz2);
    m.q = Eigen::Vector3d(q, -q, 0.0);
    m.drive_frequency = drive_frequency;
    m.species = model.species;
    return m;
}

} // namespace icsim
