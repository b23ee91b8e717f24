#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "icsim/model.hpp"

namespace icsim {

struct CrystalConfiguration {
    PositionMatrix positions; // N x 3, m
    double energy = 0.0;      // J
    bool converged = false;
    double gradient_norm = 0.0; // J/m
};

// Coordinate restriction for constrained minimization. AxialLine keeps ions
// on the z axis; RadialPlane keeps them in the z = 0 plane. Either is an
// invariant manifold of the potential, so the restricted stationary points
// are stationary in the full space as well.
enum class Subspace { Full, AxialLine, RadialPlane };

// Total potential energy, suppl.-style: harmonic trap + pairwise Coulomb.
double total_potential(const PositionMatrix& positions,
                       const PotentialModel& model);

// Analytic gradient, N x 3, J/m.
PositionMatrix potential_gradient(const PositionMatrix& positions,
                                  const PotentialModel& model);

// Analytic Hessian, 3N x 3N (row index 3*ion + axis), J/m^2.
Eigen::MatrixXd potential_hessian(const PositionMatrix& positions,
                                  const PotentialModel& model);

struct EquilibriumOptions {
    int multistart = 24;          // random initializations on top of the structured seeds
    int max_iterations = 300;
    double tolerance_scale = 1e-12; // gradient_norm < tolerance_scale * m w_r^2 l
    Subspace subspace = Subspace::Full;
    int threads = 0;              // 0: hardware_concurrency
};

// Multi-start damped-Newton minimization of the total potential. Candidate
// minima are merged deterministically by (energy, lexicographic positions);
// when no start converges the best attempt is returned with converged=false.
CrystalConfiguration find_equilibrium(const PotentialModel& model,
                                      std::uint64_t seed = 0,
                                      const EquilibriumOptions& options = {});

// Newton refinement from a given configuration (same convergence contract).
CrystalConfiguration refine_equilibrium(const PotentialModel& model,
                                        const PositionMatrix& start,
                                        const EquilibriumOptions& options = {});

// Smallest pair distance of a configuration, m.
double nearest_neighbor_spacing(const PositionMatrix& positions);

// Deterministic initial guesses used by the multistart (exposed for tests).
std::vector<PositionMatrix> structured_seeds(const PotentialModel& model,
                                             Subspace subspace);

} // namespace icsim
