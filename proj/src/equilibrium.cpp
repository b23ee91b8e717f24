#include "icsim/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "icsim/constants.hpp"
#include "icsim/errors.hpp"
#include "icsim/parallel.hpp"

namespace icsim {

namespace {

constexpr double kCoincidentTol = 1e-12; // units of l

struct Scaled {
    Eigen::Vector3d w2;  // (omega_i / omega_r)^2
    int n;
};

Scaled scaled_model(const PotentialModel& model) {
    const double wr = model.omega_r();
    Scaled s;
    s.w2 = Eigen::Vector3d(model.omega_x / wr, model.omega_y / wr,
                           model.omega_z / wr)
               .array()
               .square();
    s.n = model.n_ions;
    return s;
}

// Energy in units of k Q^2 / l, coordinates in units of l.
double energy_nd(const Eigen::VectorXd& x, const Scaled& s) {
    double u = 0.0;
    for (int i = 0; i < s.n; ++i)
        for (int k = 0; k < 3; ++k)
            u += 0.5 * s.w2[k] * x[3 * i + k] * x[3 * i + k];
    for (int i = 0; i < s.n; ++i) {
        for (int j = i + 1; j < s.n; ++j) {
            const double dx = x[3 * i] - x[3 * j];
            const double dy = x[3 * i + 1] - x[3 * j + 1];
            const double dz = x[3 * i + 2] - x[3 * j + 2];
            const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
            if (r < kCoincidentTol)
                throw CoincidentIons("coincident ions in energy evaluation");
            u += 1.0 / r;
        }
    }
    return u;
}

Eigen::VectorXd gradient_nd(const Eigen::VectorXd& x, const Scaled& s) {
    Eigen::VectorXd g(3 * s.n);
    for (int i = 0; i < s.n; ++i)
        for (int k = 0; k < 3; ++k)
            g[3 * i + k] = s.w2[k] * x[3 * i + k];
    for (int i = 0; i < s.n; ++i) {
        for (int j = i + 1; j < s.n; ++j) {
            Eigen::Vector3d d(x[3 * i] - x[3 * j], x[3 * i + 1] - x[3 * j + 1],
                              x[3 * i + 2] - x[3 * j + 2]);
            const double r = d.norm();
            if (r < kCoincidentTol)
                throw CoincidentIons("coincident ions in gradient evaluation");
            const Eigen::Vector3d f = d / (r * r * r);
            for (int k = 0; k < 3; ++k) {
                g[3 * i + k] -= f[k];
                g[3 * j + k] += f[k];
            }
        }
    }
    return g;
}

Eigen::MatrixXd hessian_nd(const Eigen::VectorXd& x, const Scaled& s) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3 * s.n, 3 * s.n);
    for (int i = 0; i < s.n; ++i)
        for (int k = 0; k < 3; ++k)
            h(3 * i + k, 3 * i + k) = s.w2[k];
    for (int i = 0; i < s.n; ++i) {
        for (int j = i + 1; j < s.n; ++j) {
            Eigen::Vector3d d(x[3 * i] - x[3 * j], x[3 * i + 1] - x[3 * j + 1],
                              x[3 * i + 2] - x[3 * j + 2]);
            const double r = d.norm();
            if (r < kCoincidentTol)
                throw CoincidentIons("coincident ions in hessian evaluation");
            const double r3 = r * r * r;
            const double r5 = r3 * r * r;
            // pair block: 3 d d^T / r^5 - I / r^3 (outer product formed
            // first so the block is exactly symmetric)
            const Eigen::Matrix3d outer = d * d.transpose();
            Eigen::Matrix3d blk =
                3.0 / r5 * outer - Eigen::Matrix3d::Identity() / r3;
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) {
                    h(3 * i + a, 3 * i + b) += blk(a, b);
                    h(3 * j + a, 3 * j + b) += blk(a, b);
                    h(3 * i + a, 3 * j + b) -= blk(a, b);
                    h(3 * j + a, 3 * i + b) -= blk(a, b);
                }
            }
        }
    }
    return h;
}

std::vector<int> dof_indices(int n, Subspace sub) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < 3; ++k) {
            if (sub == Subspace::AxialLine && k != 2) continue;
            if (sub == Subspace::RadialPlane && k == 2) continue;
            idx.push_back(3 * i + k);
        }
    }
    return idx;
}

struct NewtonResult {
    Eigen::VectorXd x;
    double energy;
    double gradient_norm;
    bool converged;
};

// Damped Newton with eigenvalue-modified Hessian: negative-curvature
// directions are flipped (steepest-descent-like) and near-zero directions
// (e.g. the rotational mode of a degenerate trap) are floored.
NewtonResult minimize_nd(Eigen::VectorXd x, const Scaled& s, Subspace sub,
                         int max_iter, double gtol) {
    const std::vector<int> idx = dof_indices(s.n, sub);
    const int m = static_cast<int>(idx.size());

    // enforce the constraint exactly
    if (sub != Subspace::Full) {
        std::vector<bool> keep(3 * s.n, false);
        for (int k : idx) keep[k] = true;
        for (int k = 0; k < 3 * s.n; ++k)
            if (!keep[k]) x[k] = 0.0;
    }

    double e = energy_nd(x, s);
    double gnorm = 0.0;
    bool converged = false;

    for (int iter = 0; iter < max_iter; ++iter) {
        const Eigen::VectorXd g_full = gradient_nd(x, s);
        Eigen::VectorXd g(m);
        for (int k = 0; k < m; ++k) g[k] = g_full[idx[k]];
        gnorm = g.norm();
        if (gnorm < gtol) {
            converged = true;
            break;
        }

        const Eigen::MatrixXd h_full = hessian_nd(x, s);
        Eigen::MatrixXd h(m, m);
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) h(r, c) = h_full(idx[r], idx[c]);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        const Eigen::VectorXd& lam = es.eigenvalues();
        const double floor_val =
            std::max(1e-8, 1e-10 * std::abs(lam[m - 1]));
        Eigen::VectorXd gl = es.eigenvectors().transpose() * g;
        for (int k = 0; k < m; ++k) {
            double l = lam[k];
            if (l < floor_val) l = std::max(std::abs(l), floor_val);
            gl[k] /= l;
        }
        Eigen::VectorXd step = -(es.eigenvectors() * gl);

        // cap absurd steps from tiny curvature
        const double max_step = 2.0 + x.norm();
        if (step.norm() > max_step) step *= max_step / step.norm();

        // inside the quadratic basin the energy decrease falls below the
        // double-precision floor of the total energy; take the raw Newton
        // step there
        if (gnorm < 1e-6 * std::max(1.0, std::sqrt(std::abs(e)))) {
            bool ok = true;
            Eigen::VectorXd xt = x;
            for (int k = 0; k < m; ++k) xt[idx[k]] += step[k];
            try {
                e = energy_nd(xt, s);
            } catch (const CoincidentIons&) {
                ok = false;
            }
            if (ok) {
                x = xt;
                continue;
            }
        }

        const double slope = g.dot(step);
        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            Eigen::VectorXd xt = x;
            for (int k = 0; k < m; ++k) xt[idx[k]] += t * step[k];
            double et;
            try {
                et = energy_nd(xt, s);
            } catch (const CoincidentIons&) {
                t *= 0.5;
                continue;
            }
            if (et <= e + 1e-4 * t * slope) {
                x = xt;
                e = et;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break; // line search stalled at roundoff scale
    }
    // refresh the gradient norm at the final iterate
    const Eigen::VectorXd g_full = gradient_nd(x, s);
    double g2 = 0.0;
    for (int k : idx) g2 += g_full[k] * g_full[k];
    gnorm = std::sqrt(g2);
    if (gnorm < gtol) converged = true;
    return NewtonResult{x, e, gnorm, converged};
}

// true when a is strictly better: lower energy, ties broken lexicographically
bool candidate_less(const NewtonResult& a, const NewtonResult& b) {
    if (a.converged != b.converged) return a.converged;
    if (a.energy != b.energy) return a.energy < b.energy;
    for (int k = 0; k < a.x.size(); ++k)
        if (a.x[k] != b.x[k]) return a.x[k] < b.x[k];
    return false;
}

Eigen::VectorXd flatten(const PositionMatrix& p) {
    Eigen::VectorXd x(3 * p.rows());
    for (int i = 0; i < p.rows(); ++i)
        for (int k = 0; k < 3; ++k) x[3 * i + k] = p(i, k);
    return x;
}

PositionMatrix unflatten(const Eigen::VectorXd& x) {
    PositionMatrix p(x.size() / 3, 3);
    for (int i = 0; i < p.rows(); ++i)
        for (int k = 0; k < 3; ++k) p(i, k) = x[3 * i + k];
    return p;
}

} // namespace

double total_potential(const PositionMatrix& positions,
                       const PotentialModel& model) {
    const double l = length_scale(model);
    return energy_scale(model) *
           energy_nd(flatten(positions) / l, scaled_model(model));
}

PositionMatrix potential_gradient(const PositionMatrix& positions,
                                  const PotentialModel& model) {
    const double l = length_scale(model);
    const Eigen::VectorXd g =
        gradient_nd(flatten(positions) / l, scaled_model(model));
    return unflatten(g * (energy_scale(model) / l));
}

Eigen::MatrixXd potential_hessian(const PositionMatrix& positions,
                                  const PotentialModel& model) {
    const double l = length_scale(model);
    return hessian_nd(flatten(positions) / l, scaled_model(model)) *
           (energy_scale(model) / (l * l));
}

std::vector<PositionMatrix> structured_seeds(const PotentialModel& model,
                                             Subspace subspace) {
    const int n = model.n_ions;
    const double l = length_scale(model);
    std::vector<PositionMatrix> seeds;

    // chain along z, spacing set by the axial length scale
    if (subspace != Subspace::RadialPlane) {
        const double lz = l * std::cbrt(std::pow(model.omega_r() / model.omega_z, 2.0));
        PositionMatrix line = PositionMatrix::Zero(n, 3);
        const double spacing = 2.0 * lz / std::cbrt(static_cast<double>(n));
        for (int i = 0; i < n; ++i)
            line(i, 2) = spacing * (i - 0.5 * (n - 1));
        seeds.push_back(line);
    }

    if (subspace != Subspace::AxialLine && n > 1) {
        // ring in the radial plane with near-unit spacing
        PositionMatrix ring = PositionMatrix::Zero(n, 3);
        const double radius = l / (2.0 * std::sin(constants::pi / n));
        for (int i = 0; i < n; ++i) {
            const double phi = 2.0 * constants::pi * i / n;
            ring(i, 0) = radius * std::cos(phi);
            ring(i, 1) = radius * std::sin(phi);
        }
        seeds.push_back(ring);

        // triangular patch: closest N sites of a triangular lattice
        std::vector<Eigen::Vector3d> sites;
        const int halo = static_cast<int>(std::sqrt(n)) + 3;
        for (int i = -halo; i <= halo; ++i) {
            for (int j = -halo; j <= halo; ++j) {
                sites.emplace_back(l * (i + 0.5 * j),
                                   l * (std::sqrt(3.0) / 2.0 * j), 0.0);
            }
        }
        std::sort(sites.begin(), sites.end(),
                  [](const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
                      if (a.norm() != b.norm()) return a.norm() < b.norm();
                      if (a.x() != b.x()) return a.x() < b.x();
                      return a.y() < b.y();
                  });
        PositionMatrix patch(n, 3);
        Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
        for (int i = 0; i < n; ++i) centroid += sites[i];
        centroid /= n;
        for (int i = 0; i < n; ++i)
            patch.row(i) = (sites[i] - centroid).transpose();
        seeds.push_back(patch);
    }
    return seeds;
}

namespace {

CrystalConfiguration run_multistart(const PotentialModel& model,
                                    std::vector<Eigen::VectorXd> starts,
                                    const EquilibriumOptions& options) {
    const Scaled s = scaled_model(model);
    const double l = length_scale(model);

    std::vector<NewtonResult> results(starts.size());
    parallel_for(starts.size(), options.threads, [&](std::size_t i) {
        results[i] = minimize_nd(starts[i], s, options.subspace,
                                 options.max_iterations,
                                 options.tolerance_scale);
    });

    // Reject converged stationary points with meaningful negative curvature
    // (saddles); keep them only if nothing better exists.
    const std::vector<int> idx = dof_indices(s.n, options.subspace);
    auto is_minimum = [&](const NewtonResult& r) {
        if (!r.converged) return false;
        Eigen::MatrixXd h_full = hessian_nd(r.x, s);
        const int m = static_cast<int>(idx.size());
        Eigen::MatrixXd h(m, m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) h(a, b) = h_full(idx[a], idx[b]);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        return es.eigenvalues()[0] > -1e-6;
    };

    const NewtonResult* best = nullptr;
    for (const auto& r : results) {
        if (!is_minimum(r)) continue;
        if (!best || candidate_less(r, *best)) best = &r;
    }
    if (!best) {
        for (const auto& r : results)
            if (!best || candidate_less(r, *best)) best = &r;
    }

    CrystalConfiguration config;
    config.positions = unflatten(best->x) * l;
    config.energy = best->energy * energy_scale(model);
    config.gradient_norm = best->gradient_norm * energy_scale(model) / l;
    config.converged = best->converged && is_minimum(*best);
    return config;
}

} // namespace

CrystalConfiguration find_equilibrium(const PotentialModel& model,
                                      std::uint64_t seed,
                                      const EquilibriumOptions& options) {
    const int n = model.n_ions;
    if (n < 1) throw ValidationError("need at least one ion");
    const double l = length_scale(model);

    if (n == 1) {
        CrystalConfiguration config;
        config.positions = PositionMatrix::Zero(1, 3);
        config.energy = 0.0;
        config.gradient_norm = 0.0;
        config.converged = true;
        return config;
    }

    std::vector<Eigen::VectorXd> starts;
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> gauss(0.0, 1.0);

    for (const auto& seed_config : structured_seeds(model, options.subspace)) {
        Eigen::VectorXd x = flatten(seed_config) / l;
        // break exact symmetries so saddles are escapable
        for (int k = 0; k < x.size(); ++k) x[k] += 1e-4 * gauss(rng);
        starts.push_back(x);
    }
    const double radius = 0.8 * std::cbrt(static_cast<double>(n));
    for (int c = 0; c < options.multistart; ++c) {
        Eigen::VectorXd x(3 * n);
        for (int k = 0; k < 3 * n; ++k) x[k] = radius * gauss(rng);
        starts.push_back(x);
    }
    return run_multistart(model, std::move(starts), options);
}

CrystalConfiguration refine_equilibrium(const PotentialModel& model,
                                        const PositionMatrix& start,
                                        const EquilibriumOptions& options) {
    if (start.rows() != model.n_ions)
        throw ValidationError("start configuration size mismatch");
    std::vector<Eigen::VectorXd> starts{flatten(start) / length_scale(model)};
    return run_multistart(model, std::move(starts), options);
}

double nearest_neighbor_spacing(const PositionMatrix& positions) {
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < positions.rows(); ++i)
        for (int j = i + 1; j < positions.rows(); ++j)
            d = std::min(d, (positions.row(i) - positions.row(j)).norm());
    return d;
}

} // namespace icsim
