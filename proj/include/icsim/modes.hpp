#pragma once

#include <vector>

#include <Eigen/Core>

#include "icsim/equilibrium.hpp"
#include "icsim/model.hpp"

namespace icsim {

enum class ModeSubspace { Axial, InPlane, Full };

const char* to_string(ModeSubspace s);

// Normal-mode spectrum. Frequencies ascend; an unstable mode is encoded as
// -sqrt(|lambda|/m) (pseudopotential) or by a multiplier off the unit circle
// (Floquet) and listed in unstable_modes. Eigenvector columns follow the
// frequency ordering; rows are the subspace coordinates.
struct ModeSpectrum {
    Eigen::VectorXd frequencies;  // rad/s
    Eigen::MatrixXd eigenvectors; // orthonormal columns
    Method method;
    ModeSubspace subspace;
    bool stable = true;
    std::vector<int> unstable_modes;
    std::vector<int> zone_edge_modes; // Floquet arg(lambda) within tol of pi
};

// Hessian eigenmodes at a converged configuration. The Axial subspace is the
// N x N z block (exact for planar configurations); InPlane is the 2N x 2N
// xy block.
ModeSpectrum pseudopotential_modes(const CrystalConfiguration& config,
                                   const PotentialModel& model,
                                   ModeSubspace subspace = ModeSubspace::Full);

// Numerically exact Mathieu characteristic exponent from the single-period
// monodromy of u'' + [a + 2q cos(2 tau)] u = 0. Secular frequency is
// beta * Omega_t / 2. Throws UnstableParameters outside the first region.
double mathieu_exponent(double a, double q, double rtol = 1e-12);

bool mathieu_stable(double a, double q, double rtol = 1e-12);

// Periodic solution of the full rf dynamics with period 2 pi / Omega_t,
// found by Newton shooting on the stroboscopic map at drive phase zero.
struct PeriodicOrbit {
    RfModel model;
    PositionMatrix positions;  // N x 3, m, at drive phase 0
    PositionMatrix velocities; // N x 3, m/s, at drive phase 0
    double residual = 0.0;     // stroboscopic gap, units of l
    bool converged = false;
    bool in_plane = false;   // orbit confined to z = 0
    bool unstable = false;   // some in-plane multiplier off the unit circle

    double period() const { return model.rf_period(); }
};

struct OrbitOptions {
    double rtol = 1e-12;
    double residual_tol = 1e-12; // units of l
    int max_newton = 40;
};

PeriodicOrbit find_periodic_orbit(const RfModel& model,
                                  const CrystalConfiguration& guess,
                                  const OrbitOptions& options = {});

struct OrbitSamples {
    std::vector<double> times;            // s, within one rf period
    std::vector<PositionMatrix> positions;
    std::vector<PositionMatrix> velocities;
};

OrbitSamples sample_orbit(const PeriodicOrbit& orbit, int n_samples = 128);

PositionMatrix time_averaged_positions(const PeriodicOrbit& orbit,
                                       int n_samples = 256);

// Per-ion micromotion amplitude |r1| from the first drive-harmonic Fourier
// component of the in-plane coordinates.
Eigen::VectorXd first_harmonic_amplitudes(const PeriodicOrbit& orbit,
                                          int n_samples = 256);

// Monodromy of the linearized dynamics about the orbit over one rf period,
// in nondimensional (x/l, dx/dtau) phase coordinates. Subspaces other than
// Full require an in-plane orbit.
Eigen::MatrixXd monodromy_matrix(const PeriodicOrbit& orbit,
                                 ModeSubspace subspace = ModeSubspace::Full,
                                 double reference_phase = 0.0,
                                 double rtol = 1e-12);

// Floquet-Lyapunov modes: multiplier pairs e^{+-i w T} of the monodromy give
// w in (0, Omega_t/2]; eigenvectors are the position parts at the reference
// drive phase, orthonormalized.
ModeSpectrum floquet_modes(const PeriodicOrbit& orbit,
                           ModeSubspace subspace = ModeSubspace::Full,
                           double reference_phase = 0.0, double rtol = 1e-12);

struct SpinCouplings {
    Eigen::MatrixXd J;       // N x N, rad/s
    double range_exponent;   // p from |J_ij| ~ d_ij^-p
    double fit_r_squared;
};

// Molmer-Sorensen-type static couplings from an axial spectrum:
//   J_ij = Rabi^2 sum_k eta_ik eta_jk w_k / (mu^2 - w_k^2),
// eta_ik = eta_k b_ik. Throws ResonantDetuning inside the guard band.
SpinCouplings spin_spin_couplings(const ModeSpectrum& axial,
                                  const Eigen::VectorXd& eta,
                                  const PositionMatrix& positions,
                                  double detuning_mu, double rabi,
                                  double guard_band = 2.0 * 3.141592653589793 * 100.0);

} // namespace icsim
