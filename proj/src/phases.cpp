#include "icsim/phases.hpp"

#include <cmath>
#include <functional>
#include <optional>

#include <Eigen/Dense>

#include "icsim/errors.hpp"
#include "icsim/modes.hpp"
#include "icsim/parallel.hpp"

namespace icsim {

namespace {

Eigen::MatrixXd axis_block(const Eigen::MatrixXd& h, int n, int axis) {
    Eigen::MatrixXd b(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) b(i, j) = h(3 * i + axis, 3 * j + axis);
    return b;
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    return es.eigenvalues()[0];
}

// Chain equilibrium: unique up to permutation, so a single refined line
// seed suffices.
CrystalConfiguration chain_equilibrium(const PotentialModel& model) {
    EquilibriumOptions opt;
    opt.subspace = Subspace::AxialLine;
    const auto seeds = structured_seeds(model, Subspace::AxialLine);
    auto config = refine_equilibrium(model, seeds.front(), opt);
    if (!config.converged)
        throw NotConverged("chain equilibrium did not converge");
    return config;
}

// Planar (z = 0) global minimum; independent of omega_z.
CrystalConfiguration planar_equilibrium(const PotentialModel& model,
                                        std::uint64_t seed) {
    EquilibriumOptions opt;
    opt.subspace = Subspace::RadialPlane;
    opt.multistart = 16;
    auto config = find_equilibrium(model, seed, opt);
    if (!config.converged)
        throw NotConverged("planar equilibrium did not converge");
    return config;
}

// Positive while the chain is transverse-stable (pseudopotential).
double chain_margin_pseudo(const PotentialModel& model,
                           const CrystalConfiguration& chain) {
    const int n = model.n_ions;
    const Eigen::MatrixXd h = potential_hessian(chain.positions, model);
    const double scale = model.species.mass * model.omega_r() * model.omega_r();
    const double mx = min_eigenvalue(axis_block(h, n, 0));
    const double my = min_eigenvalue(axis_block(h, n, 1));
    return std::min(mx, my) / scale;
}

// Positive while the chain is transverse-stable (full rf dynamics). The
// chain is a fixed point of the drive, so each transverse Coulomb eigenmode
// obeys a scalar Mathieu equation with a_k = a + gamma * kappa_k.
double chain_margin_floquet(const PotentialModel& model,
                            const CrystalConfiguration& chain,
                            double drive_frequency) {
    const int n = model.n_ions;
    const RfModel rf = rf_model_matching(model, drive_frequency);
    const double l = length_scale(model);
    const double b = 2.0 * model.omega_r() / drive_frequency;
    const double gamma = b * b;

    // nondimensional Coulomb transverse block (same for x and y on a chain)
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double r =
                std::abs(chain.positions(i, 2) - chain.positions(j, 2)) / l;
            const double w = 1.0 / (r * r * r);
            c(i, i) -= w;
            c(j, j) -= w;
            c(i, j) += w;
            c(j, i) += w;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);

    double margin = 1e300;
    for (int axis = 0; axis < 2; ++axis) {
        const double q = rf.q[axis];
        for (int k = 0; k < n; ++k) {
            const double a_k = rf.a[axis] + gamma * es.eigenvalues()[k];
            if (!mathieu_stable(a_k, q, 1e-10)) return -1.0;
            const double beta = mathieu_exponent(a_k, q, 1e-10);
            margin = std::min(margin, beta * beta);
        }
    }
    return margin;
}

// Positive while the planar crystal is axially stable (pseudopotential).
double planar_margin_pseudo(const PotentialModel& model,
                            const CrystalConfiguration& planar) {
    const Eigen::MatrixXd h = potential_hessian(planar.positions, model);
    const double scale = model.species.mass * model.omega_r() * model.omega_r();
    return min_eigenvalue(axis_block(h, model.n_ions, 2)) / scale;
}

// Positive while the planar orbit is axially stable (Floquet multipliers of
// the 2N x 2N axial monodromy on the unit circle).
double planar_margin_floquet(const PotentialModel& model,
                             const CrystalConfiguration& planar,
                             double drive_frequency) {
    const RfModel rf = rf_model_matching(model, drive_frequency);
    PeriodicOrbit orbit;
    try {
        orbit = find_periodic_orbit(rf, planar);
    } catch (const NotConverged&) {
        return -1.0; // deep instability: shooting walks off the manifold
    }
    const Eigen::MatrixXd mono =
        monodromy_matrix(orbit, ModeSubspace::Axial, 0.0, 1e-11);
    Eigen::ComplexEigenSolver<Eigen::MatrixXd> es(mono);
    double worst = 0.0;
    for (int k = 0; k < es.eigenvalues().size(); ++k)
        worst = std::max(worst, std::abs(es.eigenvalues()[k]) - 1.0);
    return 1e-7 - worst;
}

PhaseBoundaryPoint bisect_alpha(int n_ions, Boundary boundary, Method method,
                                const PhaseScanOptions& options,
                                const std::function<double(double)>& margin,
                                bool stable_high, double lo, double hi) {
    const double m_lo = margin(lo);
    const double m_hi = margin(hi);
    const double sign = stable_high ? 1.0 : -1.0;
    if (sign * m_lo >= 0.0 || sign * m_hi <= 0.0)
        throw NoTransitionFound("no stability change inside the alpha bracket");

    while (hi - lo > options.tol_alpha) {
        const double mid = 0.5 * (lo + hi);
        const double m = margin(mid);
        if (sign * m > 0.0)
            hi = mid;
        else
            lo = mid;
    }
    PhaseBoundaryPoint point;
    point.n_ions = n_ions;
    point.boundary = boundary;
    point.method = method;
    point.alpha_critical = 0.5 * (lo + hi);
    point.bracket_width = hi - lo;
    return point;
}

} // namespace

const char* to_string(Phase p) {
    switch (p) {
        case Phase::Linear: return "linear";
        case Phase::ZigZag: return "zigzag";
        case Phase::ThreeD: return "3d";
        case Phase::Radial2D: return "radial-2d";
    }
    return "?";
}

const char* to_string(Boundary b) {
    return b == Boundary::LinearToZigZag ? "linear-zigzag" : "3d-radial2d";
}

PhaseLabel classify(const CrystalConfiguration& config,
                    const PotentialModel& model, double tol) {
    if (!config.converged)
        throw UnconvergedInput(
            "classification requires a converged configuration");
    const double l = length_scale(model);
    const int n = static_cast<int>(config.positions.rows());

    // principal radial axes from the second moment of (x, y)
    Eigen::Matrix2d moment = Eigen::Matrix2d::Zero();
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector2d r = config.positions.row(i).head<2>();
        moment += r * r.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(moment);

    double minor = 0.0, major = 0.0, axial = 0.0, radial = 0.0;
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector2d r = config.positions.row(i).head<2>();
        minor = std::max(minor, std::abs(es.eigenvectors().col(0).dot(r)));
        major = std::max(major, std::abs(es.eigenvectors().col(1).dot(r)));
        radial = std::max(radial, r.norm());
        axial = std::max(axial, std::abs(config.positions(i, 2)));
    }

    PhaseLabel label;
    label.radial_major = major / l;
    label.radial_minor = minor / l;
    label.axial = axial / l;

    if (radial / l < tol)
        label.phase = Phase::Linear;
    else if (label.axial < tol)
        label.phase = Phase::Radial2D;
    else if (label.radial_minor < tol)
        label.phase = Phase::ZigZag;
    else
        label.phase = Phase::ThreeD;
    return label;
}

PotentialModel sweep_model(int n_ions, double alpha,
                           const PhaseScanOptions& options) {
    return PotentialModel{options.omega_r, options.omega_r / options.epsilon,
                          alpha * options.omega_r, options.species, n_ions};
}

PhaseBoundaryPoint critical_alpha(int n_ions, Boundary boundary, Method method,
                                  const PhaseScanOptions& options) {
    if (n_ions < 3)
        throw ValidationError("phase boundaries require at least 3 ions");

    if (boundary == Boundary::LinearToZigZag) {
        const double lo = options.alpha_lo > 0 ? options.alpha_lo : 0.02;
        const double hi = options.alpha_hi > 0 ? options.alpha_hi : 1.2;
        auto margin = [&](double alpha) {
            const PotentialModel m = sweep_model(n_ions, alpha, options);
            const auto chain = chain_equilibrium(m);
            return method == Method::Pseudopotential
                       ? chain_margin_pseudo(m, chain)
                       : chain_margin_floquet(m, chain,
                                              options.drive_frequency);
        };
        // chain stable at low alpha
        return bisect_alpha(n_ions, boundary, method, options, margin, false,
                            lo, hi);
    }

    const double lo = options.alpha_lo > 0 ? options.alpha_lo : 0.7;
    const double hi = options.alpha_hi > 0 ? options.alpha_hi : 6.0;
    // the in-plane problem does not involve omega_z: one equilibrium per N
    const auto planar =
        planar_equilibrium(sweep_model(n_ions, hi, options), options.seed);
    auto margin = [&](double alpha) {
        const PotentialModel m = sweep_model(n_ions, alpha, options);
        return method == Method::Pseudopotential
                   ? planar_margin_pseudo(m, planar)
                   : planar_margin_floquet(m, planar, options.drive_frequency);
    };
    // planar crystal stable at high alpha
    return bisect_alpha(n_ions, boundary, method, options, margin, true, lo,
                        hi);
}

PhaseBoundaryPoint
critical_alpha_by_classification(int n_ions, Boundary boundary,
                                 const PhaseScanOptions& options) {
    if (n_ions < 3)
        throw ValidationError("phase boundaries require at least 3 ions");

    EquilibriumOptions eq_opt;
    eq_opt.multistart = 16;
    auto margin = [&](double alpha) {
        const PotentialModel m = sweep_model(n_ions, alpha, options);
        const auto config = find_equilibrium(m, options.seed, eq_opt);
        if (!config.converged)
            throw NotConverged("global minimum search did not converge");
        const Phase phase = classify(config, m).phase;
        // sign convention: positive on the stable side of each sweep
        if (boundary == Boundary::LinearToZigZag)
            return phase == Phase::Linear ? 1.0 : -1.0;
        return phase == Phase::Radial2D ? 1.0 : -1.0;
    };

    const bool zigzag = boundary == Boundary::LinearToZigZag;
    const double lo =
        options.alpha_lo > 0 ? options.alpha_lo : (zigzag ? 0.02 : 0.7);
    const double hi =
        options.alpha_hi > 0 ? options.alpha_hi : (zigzag ? 1.2 : 6.0);
    return bisect_alpha(n_ions, boundary, Method::Pseudopotential, options,
                        margin, !zigzag, lo, hi);
}

PhaseDiagram phase_diagram(int n_lo, int n_hi, Method method,
                           const PhaseScanOptions& options) {
    struct Task {
        int n;
        Boundary boundary;
    };
    std::vector<Task> tasks;
    for (int n = n_lo; n <= n_hi; ++n) {
        tasks.push_back({n, Boundary::LinearToZigZag});
        tasks.push_back({n, Boundary::ThreeDToRadial2D});
    }
    std::vector<std::optional<PhaseBoundaryPoint>> results(tasks.size());
    std::vector<std::string> errors(tasks.size());
    parallel_for(tasks.size(), options.threads, [&](std::size_t i) {
        try {
            results[i] =
                critical_alpha(tasks[i].n, tasks[i].boundary, method, options);
        } catch (const Error& e) {
            errors[i] = std::string("N=") + std::to_string(tasks[i].n) + " " +
                        to_string(tasks[i].boundary) + ": " + e.what();
        }
    });

    PhaseDiagram diagram;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (results[i])
            diagram.points.push_back(*results[i]);
        else
            diagram.failures.push_back(errors[i]);
    }
    return diagram;
}

} // namespace icsim
