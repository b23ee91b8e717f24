#pragma once

#include <Eigen/Core>

#include "icsim/trap.hpp"

namespace icsim {

using PositionMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3>;

enum class Method { Pseudopotential, Floquet };

const char* to_string(Method m);

// Time-averaged harmonic trap plus Coulomb repulsion for N identical ions.
struct PotentialModel {
    double omega_x; // rad/s
    double omega_y; // rad/s
    double omega_z; // rad/s
    IonSpecies species;
    int n_ions;

    double omega_r() const { return omega_x > omega_y ? omega_x : omega_y; }
    double alpha() const { return omega_z / omega_r(); }
};

PotentialModel pseudo_model(const TrapConfig& trap, const IonSpecies& species,
                            int n_ions);

// Characteristic length (k Q^2 / (m omega_r^2))^(1/3); used to
// nondimensionalize coordinates and tolerances.
double length_scale(const PotentialModel& model);

// Coulomb coupling energy scale k Q^2 / l.
double energy_scale(const PotentialModel& model);

// Full time-dependent single-ion trap coefficients: the force on axis u is
//   F_u = -m (Omega_t^2/4) [a_u + 2 q_u cos(Omega_t t)] u.
// The radial-asymmetry split is already folded into a_x, a_y.
struct RfModel {
    Eigen::Vector3d a;      // static coefficients per axis
    Eigen::Vector3d q;      // rf coefficients per axis, (q, -q, 0)
    double drive_frequency; // rad/s
    IonSpecies species;

    double rf_period() const;
    // Lowest-order secular frequencies (Omega_t/2) sqrt(a + q^2/2).
    PotentialModel pseudo(int n_ions) const;
};

RfModel rf_model(const TrapConfig& trap, const IonSpecies& species);

// Unique source-free rf trap whose lowest-order secular frequencies match the
// model: a_i = (2 w_i / Omega_t)^2 - q_i^2/2 with q fixed by sum(a_i) = 0,
//   q = (2/Omega_t) sqrt(w_x^2 + w_y^2 + w_z^2).
RfModel rf_model_matching(const PotentialModel& model, double drive_frequency);

} // namespace icsim
