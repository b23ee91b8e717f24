#include "icsim/modes.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "icsim/constants.hpp"
#include "icsim/errors.hpp"
#include "icsim/ode.hpp"

namespace icsim {

namespace {

constexpr double kPi = constants::pi;

std::vector<int> subspace_axes(ModeSubspace s) {
    switch (s) {
        case ModeSubspace::Axial: return {2};
        case ModeSubspace::InPlane: return {0, 1};
        case ModeSubspace::Full: return {0, 1, 2};
    }
    return {};
}

// Nondimensional rf dynamics: tau = Omega_t t / 2, lengths in units of the
// pseudopotential length scale; the drive term is cos(2 tau) and the Coulomb
// coupling strength is gamma = (2 omega_r / Omega_t)^2.
struct RfDynamics {
    int n = 0;
    Eigen::Vector3d a;
    Eigen::Vector3d q;
    double gamma = 0;
    double l = 0;          // m
    double half_drive = 0; // rad/s
};

RfDynamics make_dynamics(const RfModel& model, int n) {
    const PotentialModel pseudo = model.pseudo(n);
    RfDynamics d;
    d.n = n;
    d.a = model.a;
    d.q = model.q;
    d.l = length_scale(pseudo);
    d.half_drive = 0.5 * model.drive_frequency;
    const double b = 2.0 * pseudo.omega_r() / model.drive_frequency;
    d.gamma = b * b;
    return d;
}

// Acceleration on the flattened 3N layout (index 3*ion + axis).
void accel_nd(const RfDynamics& dyn, double tau, const Eigen::VectorXd& x,
              Eigen::VectorXd& out) {
    const double c = std::cos(2.0 * tau);
    for (int i = 0; i < dyn.n; ++i)
        for (int k = 0; k < 3; ++k)
            out[3 * i + k] = -(dyn.a[k] + 2.0 * dyn.q[k] * c) * x[3 * i + k];
    for (int i = 0; i < dyn.n; ++i) {
        for (int j = i + 1; j < dyn.n; ++j) {
            Eigen::Vector3d d(x[3 * i] - x[3 * j], x[3 * i + 1] - x[3 * j + 1],
                              x[3 * i + 2] - x[3 * j + 2]);
            const double r2 = d.squaredNorm();
            const double inv_r3 = 1.0 / (r2 * std::sqrt(r2));
            for (int k = 0; k < 3; ++k) {
                const double f = dyn.gamma * d[k] * inv_r3;
                out[3 * i + k] += f;
                out[3 * j + k] -= f;
            }
        }
    }
}

// Coulomb Hessian of sum(1/r) restricted to the given axes, evaluated at
// flattened 3N positions. dof index = ion * axes.size() + axis slot.
void coulomb_block(const RfDynamics& dyn, const Eigen::VectorXd& x,
                   const std::vector<int>& axes, Eigen::MatrixXd& c) {
    const int na = static_cast<int>(axes.size());
    c.setZero();
    for (int i = 0; i < dyn.n; ++i) {
        for (int j = i + 1; j < dyn.n; ++j) {
            Eigen::Vector3d d(x[3 * i] - x[3 * j], x[3 * i + 1] - x[3 * j + 1],
                              x[3 * i + 2] - x[3 * j + 2]);
            const double r2 = d.squaredNorm();
            const double r = std::sqrt(r2);
            const double inv_r3 = 1.0 / (r2 * r);
            const double inv_r5 = inv_r3 / r2;
            for (int ka = 0; ka < na; ++ka) {
                for (int kb = 0; kb < na; ++kb) {
                    const double b = 3.0 * d[axes[ka]] * d[axes[kb]] * inv_r5 -
                                     (axes[ka] == axes[kb] ? inv_r3 : 0.0);
                    c(na * i + ka, na * i + kb) += b;
                    c(na * j + ka, na * j + kb) += b;
                    c(na * i + ka, na * j + kb) -= b;
                    c(na * j + ka, na * i + kb) -= b;
                }
            }
        }
    }
}

// Joint orbit + variational-matrix right-hand side. The orbit runs on
// orbit_axes; the variational block runs on var_axes around it.
struct JointRhs {
    RfDynamics dyn;
    std::vector<int> orbit_axes;
    std::vector<int> var_axes; // empty: orbit only
    mutable Eigen::VectorXd xfull, afull;
    mutable Eigen::MatrixXd cblock;

    JointRhs(const RfDynamics& d, std::vector<int> oa, std::vector<int> va)
        : dyn(d), orbit_axes(std::move(oa)), var_axes(std::move(va)) {
        xfull.resize(3 * dyn.n);
        afull.resize(3 * dyn.n);
        cblock.resize(var_dofs(), var_dofs());
    }

    int orbit_dofs() const {
        return dyn.n * static_cast<int>(orbit_axes.size());
    }
    int var_dofs() const { return dyn.n * static_cast<int>(var_axes.size()); }
    int size() const {
        const int dv = 2 * var_dofs();
        return 2 * orbit_dofs() + dv * dv;
    }

    void operator()(double tau, const Eigen::VectorXd& y,
                    Eigen::VectorXd& dydt) const {
        const int no = orbit_dofs();
        const int na = static_cast<int>(orbit_axes.size());

        xfull.setZero();
        for (int i = 0; i < dyn.n; ++i)
            for (int k = 0; k < na; ++k)
                xfull[3 * i + orbit_axes[k]] = y[na * i + k];
        accel_nd(dyn, tau, xfull, afull);

        dydt.head(no) = y.segment(no, no);
        for (int i = 0; i < dyn.n; ++i)
            for (int k = 0; k < na; ++k)
                dydt[no + na * i + k] = afull[3 * i + orbit_axes[k]];

        if (var_axes.empty()) return;

        const int dv = var_dofs();
        const int nv = static_cast<int>(var_axes.size());
        const double cdrive = std::cos(2.0 * tau);
        coulomb_block(dyn, xfull, var_axes, cblock);

        // M' = [[0, I], [S, 0]] M with S = -(diag(a + 2 q cos) + gamma C)
        Eigen::Map<const Eigen::MatrixXd> m(y.data() + 2 * no, 2 * dv, 2 * dv);
        Eigen::Map<Eigen::MatrixXd> dm(dydt.data() + 2 * no, 2 * dv, 2 * dv);
        dm.topRows(dv) = m.bottomRows(dv);
        dm.bottomRows(dv).noalias() = -dyn.gamma * (cblock * m.topRows(dv));
        for (int i = 0; i < dyn.n; ++i) {
            for (int k = 0; k < nv; ++k) {
                const double diag =
                    dyn.a[var_axes[k]] + 2.0 * dyn.q[var_axes[k]] * cdrive;
                dm.row(dv + nv * i + k) -= diag * m.row(nv * i + k);
            }
        }
    }
};

struct OrbitState {
    RfDynamics dyn;
    std::vector<int> axes; // orbit axes
    Eigen::VectorXd y0;    // [x, v] nondim at tau = 0
};

OrbitState orbit_state(const PeriodicOrbit& orbit) {
    OrbitState s;
    s.dyn = make_dynamics(orbit.model, static_cast<int>(orbit.positions.rows()));
    s.axes = orbit.in_plane ? std::vector<int>{0, 1}
                            : std::vector<int>{0, 1, 2};
    const int na = static_cast<int>(s.axes.size());
    const int no = s.dyn.n * na;
    s.y0.resize(2 * no);
    const double vscale = s.dyn.l * s.dyn.half_drive;
    for (int i = 0; i < s.dyn.n; ++i) {
        for (int k = 0; k < na; ++k) {
            s.y0[na * i + k] = orbit.positions(i, s.axes[k]) / s.dyn.l;
            s.y0[no + na * i + k] = orbit.velocities(i, s.axes[k]) / vscale;
        }
    }
    return s;
}

// Deterministic eigenvector post-processing: dominant component positive,
// degenerate clusters ordered lexicographically by components.
void canonicalize_columns(Eigen::VectorXd& values, Eigen::MatrixXd& vectors,
                          double cluster_tol) {
    const int m = static_cast<int>(vectors.cols());
    for (int c = 0; c < m; ++c) {
        int imax = 0;
        vectors.col(c).cwiseAbs().maxCoeff(&imax);
        if (vectors(imax, c) < 0.0) vectors.col(c) *= -1.0;
    }
    int start = 0;
    while (start < m) {
        int end = start + 1;
        while (end < m &&
               std::abs(values[end] - values[start]) <=
                   cluster_tol * std::max(1.0, std::abs(values[start])))
            ++end;
        if (end - start > 1) {
            std::vector<int> order(end - start);
            std::iota(order.begin(), order.end(), start);
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                for (int r = 0; r < vectors.rows(); ++r) {
                    if (vectors(r, a) != vectors(r, b))
                        return vectors(r, a) < vectors(r, b);
                }
                return false;
            });
            Eigen::MatrixXd tmp(vectors.rows(), end - start);
            for (int k = 0; k < end - start; ++k)
                tmp.col(k) = vectors.col(order[k]);
            vectors.middleCols(start, end - start) = tmp;
        }
        start = end;
    }
}

} // namespace

const char* to_string(ModeSubspace s) {
    switch (s) {
        case ModeSubspace::Axial: return "axial";
        case ModeSubspace::InPlane: return "in-plane";
        case ModeSubspace::Full: return "full";
    }
    return "?";
}

ModeSpectrum pseudopotential_modes(const CrystalConfiguration& config,
                                   const PotentialModel& model,
                                   ModeSubspace subspace) {
    if (!config.converged)
        throw UnconvergedInput("mode analysis requires a converged configuration");
    const int n = static_cast<int>(config.positions.rows());
    const std::vector<int> axes = subspace_axes(subspace);
    const int na = static_cast<int>(axes.size());

    const Eigen::MatrixXd h = potential_hessian(config.positions, model);
    Eigen::MatrixXd hs(na * n, na * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int ka = 0; ka < na; ++ka)
                for (int kb = 0; kb < na; ++kb)
                    hs(na * i + ka, na * j + kb) =
                        h(3 * i + axes[ka], 3 * j + axes[kb]);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hs);
    ModeSpectrum spec;
    spec.method = Method::Pseudopotential;
    spec.subspace = subspace;
    spec.frequencies.resize(na * n);
    const double mass = model.species.mass;
    for (int k = 0; k < na * n; ++k) {
        const double lam = es.eigenvalues()[k];
        spec.frequencies[k] =
            lam >= 0.0 ? std::sqrt(lam / mass) : -std::sqrt(-lam / mass);
    }
    spec.eigenvectors = es.eigenvectors();
    canonicalize_columns(spec.frequencies, spec.eigenvectors, 1e-10);

    const double guard = 1e-9 * model.omega_r();
    for (int k = 0; k < na * n; ++k)
        if (spec.frequencies[k] < -guard) spec.unstable_modes.push_back(k);
    spec.stable = spec.unstable_modes.empty();
    return spec;
}

double mathieu_exponent(double a, double q, double rtol) {
    // monodromy of u'' + [a + 2 q cos(2 tau)] u = 0 over tau in [0, pi]
    Eigen::VectorXd y(4);
    y << 1.0, 0.0, 0.0, 1.0; // columns (u, u')
    auto rhs = [a, q](double tau, const Eigen::VectorXd& s,
                      Eigen::VectorXd& ds) {
        const double w = a + 2.0 * q * std::cos(2.0 * tau);
        ds[0] = s[1];
        ds[1] = -w * s[0];
        ds[2] = s[3];
        ds[3] = -w * s[2];
    };
    OdeOptions opt;
    opt.rtol = rtol;
    opt.atol = 1e-14;
    y = integrate_dopri5(rhs, y, 0.0, kPi, opt);
    const double trace = y[0] + y[3];
    if (std::abs(trace) > 2.0)
        throw UnstableParameters(
            "Mathieu parameters outside the first stability region");
    return std::acos(std::clamp(0.5 * trace, -1.0, 1.0)) / kPi;
}

bool mathieu_stable(double a, double q, double rtol) {
    try {
        mathieu_exponent(a, q, rtol);
        return true;
    } catch (const UnstableParameters&) {
        return false;
    }
}

PeriodicOrbit find_periodic_orbit(const RfModel& model,
                                  const CrystalConfiguration& guess,
                                  const OrbitOptions& options) {
    const int n = static_cast<int>(guess.positions.rows());
    RfDynamics dyn = make_dynamics(model, n);

    PeriodicOrbit orbit;
    orbit.model = model;
    orbit.in_plane =
        guess.positions.col(2).cwiseAbs().maxCoeff() < 1e-9 * dyn.l;
    orbit.positions = guess.positions;
    orbit.velocities = PositionMatrix::Zero(n, 3);

    // seed with the first-order micromotion factor at drive phase 0
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < 3; ++k)
            orbit.positions(i, k) *=
                1.0 + 0.5 * dyn.q[k] + dyn.q[k] * dyn.q[k] / 32.0;

    OrbitState st = orbit_state(orbit);
    const int no = dyn.n * static_cast<int>(st.axes.size());

    JointRhs rhs(dyn, st.axes, st.axes);
    OdeOptions opt;
    opt.rtol = options.rtol;
    opt.atol = 1e-14;

    Eigen::VectorXd y0 = st.y0;
    double residual = 0.0;
    bool converged = false;
    Eigen::MatrixXd mono;
    for (int iter = 0; iter < options.max_newton; ++iter) {
        Eigen::VectorXd joint(rhs.size());
        joint.head(2 * no) = y0;
        Eigen::Map<Eigen::MatrixXd>(joint.data() + 2 * no, 2 * no, 2 * no)
            .setIdentity();
        const Eigen::VectorXd out =
            integrate_dopri5(rhs, joint, 0.0, kPi, opt);

        const Eigen::VectorXd gap = out.head(2 * no) - y0;
        residual = gap.cwiseAbs().maxCoeff();
        mono = Eigen::Map<const Eigen::MatrixXd>(out.data() + 2 * no, 2 * no,
                                                 2 * no);
        if (residual < options.residual_tol) {
            converged = true;
            break;
        }
        Eigen::MatrixXd jac = mono - Eigen::MatrixXd::Identity(2 * no, 2 * no);
        y0 += jac.colPivHouseholderQr().solve(-gap);
    }

    const double vscale = dyn.l * dyn.half_drive;
    const int na = static_cast<int>(st.axes.size());
    orbit.positions.setZero();
    orbit.velocities.setZero();
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < na; ++k) {
            orbit.positions(i, st.axes[k]) = y0[na * i + k] * dyn.l;
            orbit.velocities(i, st.axes[k]) = y0[no + na * i + k] * vscale;
        }
    }
    orbit.residual = residual;
    orbit.converged = converged;
    if (!converged)
        throw NotConverged("periodic-orbit shooting did not converge");

    Eigen::ComplexEigenSolver<Eigen::MatrixXd> es(mono);
    for (int k = 0; k < es.eigenvalues().size(); ++k)
        if (std::abs(std::abs(es.eigenvalues()[k]) - 1.0) > 1e-6)
            orbit.unstable = true;
    return orbit;
}

OrbitSamples sample_orbit(const PeriodicOrbit& orbit, int n_samples) {
    OrbitState st = orbit_state(orbit);
    const int na = static_cast<int>(st.axes.size());
    const int no = st.dyn.n * na;
    JointRhs rhs(st.dyn, st.axes, {});
    OdeOptions opt;
    opt.rtol = 1e-12;
    opt.atol = 1e-14;

    OrbitSamples samples;
    const double vscale = st.dyn.l * st.dyn.half_drive;
    Eigen::VectorXd y = st.y0;
    double tau = 0.0;
    for (int s = 0; s < n_samples; ++s) {
        const double target = kPi * s / n_samples;
        y = integrate_dopri5(rhs, y, tau, target, opt);
        tau = target;
        samples.times.push_back(target / st.dyn.half_drive);
        PositionMatrix p = PositionMatrix::Zero(st.dyn.n, 3);
        PositionMatrix v = PositionMatrix::Zero(st.dyn.n, 3);
        for (int i = 0; i < st.dyn.n; ++i) {
            for (int k = 0; k < na; ++k) {
                p(i, st.axes[k]) = y[na * i + k] * st.dyn.l;
                v(i, st.axes[k]) = y[no + na * i + k] * vscale;
            }
        }
        samples.positions.push_back(std::move(p));
        samples.velocities.push_back(std::move(v));
    }
    return samples;
}

PositionMatrix time_averaged_positions(const PeriodicOrbit& orbit,
                                       int n_samples) {
    const OrbitSamples s = sample_orbit(orbit, n_samples);
    PositionMatrix mean = PositionMatrix::Zero(orbit.positions.rows(), 3);
    for (const auto& p : s.positions) mean += p;
    return mean / static_cast<double>(n_samples);
}

Eigen::VectorXd first_harmonic_amplitudes(const PeriodicOrbit& orbit,
                                          int n_samples) {
    const OrbitSamples s = sample_orbit(orbit, n_samples);
    const int n = static_cast<int>(orbit.positions.rows());
    const double w = orbit.model.drive_frequency;
    Eigen::VectorXd amp(n);
    for (int i = 0; i < n; ++i) {
        std::complex<double> cx = 0.0, cy = 0.0;
        for (int k = 0; k < n_samples; ++k) {
            const std::complex<double> e =
                std::exp(std::complex<double>(0.0, -w * s.times[k]));
            cx += s.positions[k](i, 0) * e;
            cy += s.positions[k](i, 1) * e;
        }
        cx *= 2.0 / static_cast<double>(n_samples);
        cy *= 2.0 / static_cast<double>(n_samples);
        amp[i] = std::sqrt(std::norm(cx) + std::norm(cy));
    }
    return amp;
}

Eigen::MatrixXd monodromy_matrix(const PeriodicOrbit& orbit,
                                 ModeSubspace subspace, double reference_phase,
                                 double rtol) {
    if (!orbit.converged)
        throw UnconvergedInput("monodromy requires a converged orbit");
    if (!orbit.in_plane && subspace != ModeSubspace::Full)
        throw ValidationError(
            "restricted monodromy subspaces require an in-plane orbit");
    OrbitState st = orbit_state(orbit);
    const std::vector<int> var_axes = subspace_axes(subspace);

    const int na = static_cast<int>(st.axes.size());
    const int no = st.dyn.n * na;
    const int dv = st.dyn.n * static_cast<int>(var_axes.size());

    JointRhs rhs(st.dyn, st.axes, var_axes);
    OdeOptions opt;
    opt.rtol = rtol;
    opt.atol = 1e-14;

    // advance the orbit to the requested drive phase first
    Eigen::VectorXd y = st.y0;
    const double tau0 = 0.5 * reference_phase;
    if (tau0 != 0.0) {
        JointRhs orbit_only(st.dyn, st.axes, {});
        y = integrate_dopri5(orbit_only, y, 0.0, tau0, opt);
    }

    Eigen::VectorXd joint(rhs.size());
    joint.head(2 * no) = y;
    Eigen::Map<Eigen::MatrixXd>(joint.data() + 2 * no, 2 * dv, 2 * dv)
        .setIdentity();
    const Eigen::VectorXd out =
        integrate_dopri5(rhs, joint, tau0, tau0 + kPi, opt);
    return Eigen::Map<const Eigen::MatrixXd>(out.data() + 2 * no, 2 * dv,
                                             2 * dv);
}

ModeSpectrum floquet_modes(const PeriodicOrbit& orbit, ModeSubspace subspace,
                           double reference_phase, double rtol) {
    const Eigen::MatrixXd mono =
        monodromy_matrix(orbit, subspace, reference_phase, rtol);
    const int dv = static_cast<int>(mono.rows()) / 2;
    const double half_drive = 0.5 * orbit.model.drive_frequency;

    Eigen::ComplexEigenSolver<Eigen::MatrixXd> es(mono);
    const auto& lam = es.eigenvalues();

    // pair multipliers (lambda, 1/lambda); conjugates coincide on the circle
    std::vector<bool> used(2 * dv, false);
    struct Mode {
        double omega;
        double defect;
        bool edge;
        Eigen::VectorXd shape;
    };
    std::vector<Mode> modes;
    for (int j = 0; j < 2 * dv; ++j) {
        if (used[j]) continue;
        used[j] = true;
        int partner = -1;
        double best = 1e300;
        for (int k = 0; k < 2 * dv; ++k) {
            if (used[k]) continue;
            const double miss = std::abs(lam[j] * lam[k] - 1.0);
            if (miss < best) {
                best = miss;
                partner = k;
            }
        }
        if (partner >= 0) used[partner] = true;

        const int rep =
            (partner >= 0 && lam[partner].imag() > lam[j].imag()) ? partner : j;
        const double beta = std::arg(lam[rep]) / kPi; // in [0, 1]
        Mode m;
        m.omega = std::abs(beta) * half_drive;
        m.defect = std::abs(std::abs(lam[rep]) - 1.0);
        m.edge = std::abs(std::abs(beta) - 1.0) < 1e-6;

        Eigen::VectorXcd u = es.eigenvectors().col(rep).head(dv);
        int imax = 0;
        u.cwiseAbs().maxCoeff(&imax);
        u *= std::exp(std::complex<double>(0.0, -std::arg(u[imax])));
        m.shape = u.real();
        const double norm = m.shape.norm();
        if (norm > 0.0) m.shape /= norm;
        modes.push_back(std::move(m));
    }

    std::sort(modes.begin(), modes.end(),
              [](const Mode& a, const Mode& b) { return a.omega < b.omega; });

    ModeSpectrum spec;
    spec.method = Method::Floquet;
    spec.subspace = subspace;
    spec.frequencies.resize(static_cast<int>(modes.size()));
    spec.eigenvectors.resize(dv, static_cast<int>(modes.size()));
    for (int k = 0; k < static_cast<int>(modes.size()); ++k) {
        spec.frequencies[k] = modes[k].omega;
        spec.eigenvectors.col(k) = modes[k].shape;
        if (modes[k].defect > 1e-6) spec.unstable_modes.push_back(k);
        if (modes[k].edge) spec.zone_edge_modes.push_back(k);
    }
    spec.stable = spec.unstable_modes.empty();

    // orthonormalize in frequency order (modified Gram-Schmidt)
    for (int c = 0; c < spec.eigenvectors.cols(); ++c) {
        for (int p = 0; p < c; ++p)
            spec.eigenvectors.col(c) -=
                spec.eigenvectors.col(p).dot(spec.eigenvectors.col(c)) *
                spec.eigenvectors.col(p);
        const double norm = spec.eigenvectors.col(c).norm();
        if (norm > 1e-12) spec.eigenvectors.col(c) /= norm;
    }
    canonicalize_columns(spec.frequencies, spec.eigenvectors, 1e-12);
    return spec;
}

SpinCouplings spin_spin_couplings(const ModeSpectrum& axial,
                                  const Eigen::VectorXd& eta,
                                  const PositionMatrix& positions,
                                  double detuning_mu, double rabi,
                                  double guard_band) {
    const int nmodes = static_cast<int>(axial.frequencies.size());
    const int n = static_cast<int>(positions.rows());
    if (axial.eigenvectors.rows() != n)
        throw ValidationError("spin couplings expect an axial (N x N) spectrum");
    if (eta.size() != nmodes)
        throw ValidationError("one Lamb-Dicke parameter per mode required");
    for (int k = 0; k < nmodes; ++k)
        if (std::abs(detuning_mu - axial.frequencies[k]) < guard_band)
            throw ResonantDetuning("drive detuning too close to a mode");

    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < nmodes; ++k) {
        const double wk = axial.frequencies[k];
        const double denom = detuning_mu * detuning_mu - wk * wk;
        for (int p = 0; p < n; ++p) {
            for (int r = p + 1; r < n; ++r) {
                const double term = rabi * rabi * eta[k] * eta[k] *
                                    axial.eigenvectors(p, k) *
                                    axial.eigenvectors(r, k) * wk / denom;
                j(p, r) += term;
                j(r, p) += term;
            }
        }
    }

    // power-law range fit: log|J| = c - p log d over all pairs
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    int count = 0;
    for (int p = 0; p < n; ++p) {
        for (int r = p + 1; r < n; ++r) {
            const double d = (positions.row(p) - positions.row(r)).norm();
            const double jj = std::abs(j(p, r));
            if (jj < 1e-300) continue;
            const double lx = std::log(d);
            const double ly = std::log(jj);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            syy += ly * ly;
            ++count;
        }
    }
    SpinCouplings result;
    result.J = j;
    if (count < 2) {
        result.range_exponent = 0.0;
        result.fit_r_squared = 0.0;
        return result;
    }
    const double denom = count * sxx - sx * sx;
    const double slope = (count * sxy - sx * sy) / denom;
    result.range_exponent = -slope;
    const double ss_tot = syy - sy * sy / count;
    const double ss_res =
        syy - (sy * sy / count) - slope * (sxy - sx * sy / count);
    result.fit_r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return result;
}

} // namespace icsim
