#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icsim/equilibrium.hpp"
#include "icsim/model.hpp"
#include "icsim/trap.hpp"

namespace icsim {

enum class Phase { Linear, ZigZag, ThreeD, Radial2D };

const char* to_string(Phase p);

struct PhaseLabel {
    Phase phase;
    // extents along (major radial principal axis, minor radial principal
    // axis, z), in units of the length scale l
    double radial_major;
    double radial_minor;
    double axial;
};

// Geometric classification of a converged configuration. tol is the extent
// threshold in units of l.
PhaseLabel classify(const CrystalConfiguration& config,
                    const PotentialModel& model, double tol = 1e-3);

enum class Boundary { LinearToZigZag, ThreeDToRadial2D };

const char* to_string(Boundary b);

struct PhaseBoundaryPoint {
    int n_ions;
    Boundary boundary;
    Method method;
    double alpha_critical;
    double bracket_width;
};

struct PhaseScanOptions {
    double omega_r = 2.0 * 3.141592653589793 * 450e3; // rad/s, held fixed
    double drive_frequency = 2.0 * 3.141592653589793 * 21e6; // rad/s
    double epsilon = 1.02;    // omega_x / omega_y
    double tol_alpha = 1e-3;
    IonSpecies species = IonSpecies::ytterbium_171();
    std::uint64_t seed = 0;
    int threads = 0;
    // search brackets; zeros select per-boundary defaults
    double alpha_lo = 0.0;
    double alpha_hi = 0.0;
};

// Pseudopotential model of the sweep at aspect ratio alpha: omega_x fixed at
// omega_r, omega_y = omega_r / epsilon, omega_z = alpha * omega_r.
PotentialModel sweep_model(int n_ions, double alpha,
                           const PhaseScanOptions& options);

// Critical aspect ratio by bisection on the soft-mode criterion: the chain's
// lowest transverse mode (LinearToZigZag) or the planar crystal's lowest
// axial mode (ThreeDToRadial2D) crossing zero. Method selects the
// time-averaged Hessian or the Floquet multipliers of the full rf dynamics.
PhaseBoundaryPoint critical_alpha(int n_ions, Boundary boundary, Method method,
                                  const PhaseScanOptions& options = {});

// Independent detector used by tests: bisection on the classify() label of
// full multi-start minima (pseudopotential only).
PhaseBoundaryPoint
critical_alpha_by_classification(int n_ions, Boundary boundary,
                                 const PhaseScanOptions& options = {});

struct PhaseDiagram {
    std::vector<PhaseBoundaryPoint> points; // ordered by (N, boundary)
    std::vector<std::string> failures;      // per-point error messages
};

// Both boundaries for each N in [n_lo, n_hi]. Per-point failures are
// collected, not fatal.
PhaseDiagram phase_diagram(int n_lo, int n_hi, Method method,
                           const PhaseScanOptions& options = {});

} // namespace icsim
