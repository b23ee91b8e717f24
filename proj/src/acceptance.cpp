#include "icsim/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "icsim/constants.hpp"
#include "icsim/dynamics.hpp"
#include "icsim/equilibrium.hpp"
#include "icsim/errors.hpp"
#include "icsim/modes.hpp"
#include "icsim/parallel.hpp"
#include "icsim/phases.hpp"
#include "icsim/stats.hpp"
#include "icsim/thermometry.hpp"
#include "icsim/trap.hpp"

namespace icsim {

namespace {

constexpr double two_pi = 2.0 * constants::pi;

TrapConfig paper_trap() {
    TrapConfig t;
    t.rf_voltage = 340.0;
    t.dc_voltage = 26.5;
    t.radial_extent = 460e-6;
    t.axial_extent = 335e-6;
    t.drive_frequency = two_pi * 21e6;
    t.geometric_factor = 0.12;
    t.radial_asymmetry = 1.02;
    return t;
}

TrapConfig trap_at_alpha(double alpha) {
    TrapConfig t = paper_trap();
    t.dc_voltage = dc_voltage_for_alpha(alpha, t, IonSpecies::ytterbium_171());
    return t;
}

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void require(bool condition, const std::string& what) {
        ok = ok && condition;
        detail << (condition ? "" : "FAILED: ") << what << "; ";
    }
};

// 1. Mathieu parameter of the paper trap
Check criterion_mathieu_q(int) {
    Check c;
    const auto coeff =
        mathieu_coefficients(paper_trap(), IonSpecies::ytterbium_171());
    std::ostringstream v;
    v << "q = " << coeff.q_x << " (target 0.10 +- 0.005)";
    c.require(std::abs(coeff.q_x - 0.10) <= 0.005, v.str());
    return c;
}

// 2. Lamb-Dicke parameter
Check criterion_lamb_dicke(int) {
    Check c;
    const double eta = lamb_dicke(IonSpecies::ytterbium_171(),
                                  53.0 * constants::pi / 180.0, two_pi * 900e3);
    std::ostringstream v;
    v << "eta = " << eta << " (target 0.16 +- 0.005)";
    c.require(std::abs(eta - 0.16) <= 0.005, v.str());
    return c;
}

// 3. power-broadened Lorentzian width
Check criterion_lorentz_width(int) {
    Check c;
    const double width = lorentz_fwhm(IonSpecies::ytterbium_171(), 0.3);
    std::ostringstream v;
    v << "width = 2pi x " << width / two_pi / 1e6
      << " MHz (target 22 MHz +- 2%)";
    c.require(std::abs(width - two_pi * 22e6) <= 0.02 * two_pi * 22e6, v.str());
    return c;
}

// 4. heating-rate conversion chain
Check criterion_conversions(int) {
    Check c;
    const IonSpecies yb = IonSpecies::ytterbium_171();
    const double omega = two_pi * 900e3;
    const auto conv = heating_conversions(100.0, omega, yb);
    {
        std::ostringstream v;
        v << "T_dot = " << conv.temperature_rate
          << " K/s (target 0.004 +- 5%)";
        c.require(std::abs(conv.temperature_rate - 0.004) <= 0.05 * 0.004,
                  v.str());
    }
    {
        std::ostringstream v;
        v << "S_E = " << conv.field_noise_density
          << " (target 2.65e-12 +- 5%)";
        c.require(std::abs(conv.field_noise_density - 2.65e-12) <=
                      0.05 * 2.65e-12,
                  v.str());
    }
    const double back =
        quanta_rate_from_field_noise(conv.field_noise_density, omega, yb);
    c.require(std::abs(back - 100.0) / 100.0 < 1e-12, "round trip to 1e-12");
    return c;
}

// 5. axial COM invariance for N = 1..19
Check criterion_axial_com(int threads) {
    (void)threads;
    Check c;
    const TrapConfig trap = trap_at_alpha(2.0);
    const IonSpecies yb = IonSpecies::ytterbium_171();
    double worst = 0.0;
    for (int n = 1; n <= 19; ++n) {
        const PotentialModel model = pseudo_model(trap, yb, n);
        EquilibriumOptions opt;
        opt.multistart = 8;
        const auto eq = find_equilibrium(model, 11, opt);
        if (!eq.converged) {
            c.require(false, "N=" + std::to_string(n) + " did not converge");
            continue;
        }
        const auto spec = pseudopotential_modes(eq, model, ModeSubspace::Axial);
        const double rel =
            std::abs(spec.frequencies[n - 1] - model.omega_z) / model.omega_z;
        worst = std::max(worst, rel);
    }
    std::ostringstream v;
    v << "worst |f_COM - f_z|/f_z = " << worst << " over N=1..19";
    c.require(worst < 1e-9, v.str());
    return c;
}

// 6. single-ion Floquet modes against the scalar Mathieu oracle
Check criterion_mathieu_oracle(int) {
    Check c;
    const IonSpecies yb = IonSpecies::ytterbium_171();
    const double W = two_pi * 21e6;
    const double points[6][2] = {{0.0, 0.10},   {-0.002, 0.10}, {0.002, 0.08},
                                 {0.005, 0.15}, {-0.004, 0.12}, {0.01, 0.30}};
    double worst = 0.0;
    for (const auto& p : points) {
        RfModel rf;
        rf.drive_frequency = W;
        rf.species = yb;
        rf.a = Eigen::Vector3d(p[0], p[0], 0.01);
        rf.q = Eigen::Vector3d(p[1], -p[1], 0.0);
        CrystalConfiguration guess;
        guess.positions = PositionMatrix::Zero(1, 3);
        guess.converged = true;
        const auto orbit = find_periodic_orbit(rf, guess);
        const auto spec = floquet_modes(orbit, ModeSubspace::Full);
        // match per axis against the scalar monodromy exponents
        std::vector<double> expected;
        for (int k = 0; k < 3; ++k)
            expected.push_back(0.5 * W * mathieu_exponent(rf.a[k], rf.q[k]));
        std::sort(expected.begin(), expected.end());
        for (int k = 0; k < 3; ++k)
            worst = std::max(worst,
                             std::abs(spec.frequencies[k] - expected[k]) /
                                 expected[k]);
    }
    std::ostringstream v;
    v << "worst relative mismatch = " << worst << " over 6 (a, q) points";
    c.require(worst < 1e-6, v.str());
    return c;
}

// 7. 7-ion axial spectrum: pseudopotential vs Floquet
Check criterion_mode_discrepancy(int) {
    Check c;
    const IonSpecies yb = IonSpecies::ytterbium_171();
    const TrapConfig trap = trap_at_alpha(2.0);
    const RfModel rf = rf_model(trap, yb);
    const PotentialModel model = rf.pseudo(7);
    const auto eq = find_equilibrium(model, 3);
    const auto pseudo = pseudopotential_modes(eq, model, ModeSubspace::Axial);
    const auto orbit = find_periodic_orbit(rf, eq);
    const auto floquet = floquet_modes(orbit, ModeSubspace::Axial);

    double worst_upper = 0.0;
    for (int k = 1; k < 7; ++k)
        worst_upper = std::max(
            worst_upper,
            std::abs(floquet.frequencies[k] - pseudo.frequencies[k]) / two_pi);
    const double lowest =
        std::abs(floquet.frequencies[0] - pseudo.frequencies[0]) / two_pi;

    std::ostringstream v;
    v << "deltas (Hz):";
    for (int k = 0; k < 7; ++k)
        v << ' '
          << (floquet.frequencies[k] - pseudo.frequencies[k]) / two_pi;
    c.detail << v.str() << "; ";
    c.require(worst_upper < 3e3,
              "all modes above the lowest within 3 kHz (worst " +
                  std::to_string(worst_upper) + " Hz)");
    c.require(lowest >= 5e3, "lowest mode differs by >= 5 kHz (got " +
                                 std::to_string(lowest) + " Hz)");
    return c;
}

// 8. phase diagram boundaries, monotonicity and method agreement
Check criterion_phase_diagram(int threads) {
    Check c;
    PhaseScanOptions opt;
    opt.threads = threads;
    const auto pseudo = phase_diagram(3, 19, Method::Pseudopotential, opt);
    c.require(pseudo.failures.empty(), "pseudopotential sweep completed");

    std::vector<double> zigzag(20, 0.0), planar(20, 0.0);
    for (const auto& p : pseudo.points) {
        if (p.boundary == Boundary::LinearToZigZag)
            zigzag[p.n_ions] = p.alpha_critical;
        else
            planar[p.n_ions] = p.alpha_critical;
    }
    bool zig_monotone = true, planar_monotone = true;
    for (int n = 4; n <= 19; ++n) {
        if (zigzag[n] > zigzag[n - 1] + 1e-12) zig_monotone = false;
        if (planar[n] < planar[n - 1] - 1e-12) planar_monotone = false;
    }
    c.require(zig_monotone, "alpha_c(1D->zigzag) monotone nonincreasing");
    c.require(planar_monotone, "alpha_c(3D->radial-2D) monotone nondecreasing");

    const double analytic = std::sqrt(5.0 / 12.0) / opt.epsilon;
    std::ostringstream v;
    v << "N=3 chain boundary " << zigzag[3] << " vs analytic " << analytic;
    c.require(std::abs(zigzag[3] - analytic) < 1e-3, v.str());

    // Floquet 2D boundary within 10 % for every N
    double worst = 0.0;
    std::vector<std::optional<PhaseBoundaryPoint>> floquet(20);
    std::vector<int> ns;
    for (int n = 3; n <= 19; ++n) ns.push_back(n);
    parallel_for(ns.size(), threads, [&](std::size_t i) {
        floquet[ns[i]] = critical_alpha(ns[i], Boundary::ThreeDToRadial2D,
                                        Method::Floquet, opt);
    });
    for (int n = 3; n <= 19; ++n) {
        if (!floquet[n]) {
            c.require(false, "Floquet N=" + std::to_string(n) + " missing");
            continue;
        }
        worst = std::max(worst, std::abs(floquet[n]->alpha_critical -
                                         planar[n]) /
                                    planar[n]);
    }
    std::ostringstream w;
    w << "worst Floquet/pseudo 2D boundary gap = " << 100.0 * worst << " %";
    c.require(worst < 0.10, w.str());
    return c;
}

// 9. 13-ion full-rf micromotion against the pseudopotential crystal
Check criterion_micromotion(int) {
    Check c;
    const IonSpecies yb = IonSpecies::ytterbium_171();
    const TrapConfig trap = trap_at_alpha(3.0); // radial-2D regime for N=13
    const auto system = MdSystem::from_trap(trap, yb, 13);
    const auto eq = find_equilibrium(system.pseudo, 3);
    const auto orbit = find_periodic_orbit(system.rf, eq);

    SimulationParams params;
    params.timestep = system.rf.rf_period() / 100.0;
    params.duration = 200e-6;
    params.record_stride = 10;
    const auto traj =
        integrate(system, orbit.positions, orbit.velocities, {}, params);

    // per-ion first-harmonic amplitude from the trajectory
    const double wd = system.rf.drive_frequency;
    const int n_samples = static_cast<int>(traj.times.size());
    const int n = 13;
    Eigen::VectorXd amp(n);
    PositionMatrix mean = PositionMatrix::Zero(n, 3);
    for (const auto& p : traj.positions) mean += p;
    mean /= static_cast<double>(n_samples);
    for (int i = 0; i < n; ++i) {
        std::complex<double> cx = 0.0, cy = 0.0;
        for (int s = 0; s < n_samples; ++s) {
            const std::complex<double> e =
                std::exp(std::complex<double>(0.0, -wd * traj.times[s]));
            cx += traj.positions[s](i, 0) * e;
            cy += traj.positions[s](i, 1) * e;
        }
        amp[i] = 2.0 / n_samples * std::sqrt(std::norm(cx) + std::norm(cy));
    }

    // slope of |r1| vs radial distance, through the origin
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = eq.positions.row(i).head<2>().norm();
        if (r < 0.05 * length_scale(system.pseudo)) continue;
        num += amp[i] * r;
        den += r * r;
    }
    const double slope = num / den;
    const double q = system.rf.q[0];
    std::ostringstream v;
    v << "micromotion slope = " << slope << " vs q/2 = " << q / 2.0;
    c.require(std::abs(slope - 0.5 * q) <= 0.05 * 0.5 * q, v.str());

    const double spacing = nearest_neighbor_spacing(eq.positions);
    const double worst =
        (mean - eq.positions).rowwise().norm().maxCoeff() / spacing;
    std::ostringstream w;
    w << "worst time-averaged offset = " << 100.0 * worst << " % of spacing";
    c.require(worst < 0.02, w.str());
    return c;
}

// 10. heating anisotropy of the uncooled 7-ion crystal
Check criterion_heating_anisotropy(int threads) {
    Check c;
    const IonSpecies yb = IonSpecies::ytterbium_171();
    const auto system = MdSystem::from_trap(trap_at_alpha(2.0), yb, 7);
    HeatingOptions opt;
    opt.n_seeds = 24;
    opt.duration = 24e-3;
    opt.window = 400e-6;
    opt.burn_in = 1e-3;
    opt.initial_temperature = 3e-3;
    opt.seed = 7;
    opt.threads = threads;
    const auto result = rf_heating_experiment(system, opt);

    std::ostringstream v;
    v << "Tr_rate = " << result.radial_rate << " +- "
      << result.radial_rate_stderr << " K/s, Tz_rate = " << result.axial_rate
      << " +- " << result.axial_rate_stderr
      << " K/s, R2 = " << result.radial_r_squared << ", melted "
      << result.melted_count;
    c.detail << v.str() << "; ";
    c.require(result.radial_rate > 0.0, "radial temperature grows");
    c.require(result.radial_rate >= 10.0 * result.axial_rate,
              "radial rate exceeds 10x the axial rate");
    c.require(result.radial_r_squared > 0.9, "T_r(t) linear with R^2 > 0.9");
    return c;
}

// 11. thermometry round trips
Check criterion_thermometry(int) {
    Check c;
    const IonSpecies yb = IonSpecies::ytterbium_171();
    const double theta = constants::pi / 4.0;
    const double width = lorentz_fwhm(yb, 0.3);
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto grid = [](double span, int n) {
        Eigen::VectorXd g(n);
        for (int i = 0; i < n; ++i) g[i] = -span + 2.0 * span * i / (n - 1);
        return g;
    };
    for (double t_r : {3e-3, 30e-3, 300e-3}) {
        auto profile = voigt_profile(grid(two_pi * 250e6, 601), t_r, 3e-3,
                                     theta, yb, 0.3, 1000.0, 50.0);
        for (int i = 0; i < profile.intensities.size(); ++i)
            profile.intensities[i] += 10.0 * gauss(rng);
        const auto fit = fit_voigt(profile, width, theta, 3e-3, yb);
        std::ostringstream v;
        v << "T_r " << t_r << " -> " << fit.t_radial;
        c.require(std::abs(fit.t_radial - t_r) <= 0.10 * t_r, v.str());
    }

    std::vector<double> heat_times = {0.0, 80e-3, 160e-3}, recovered;
    for (double t : heat_times) {
        auto profile = voigt_profile(grid(two_pi * 400e6, 801),
                                     3e-3 + 1.04 * t, 3e-3, theta, yb, 0.3,
                                     1000.0, 20.0);
        for (int i = 0; i < profile.intensities.size(); ++i)
            profile.intensities[i] += 10.0 * gauss(rng);
        recovered.push_back(fit_voigt(profile, width, theta, 3e-3, yb).t_radial);
    }
    const LinearFit lf = fit_line(heat_times, recovered);
    std::ostringstream v;
    v << "recovered slope = " << lf.slope << " K/s (target 1.04 +- 10%)";
    c.require(std::abs(lf.slope - 1.04) <= 0.104, v.str());

    const double nbar = ratio_to_nbar(5.0 / 7.0);
    c.require(std::abs(nbar - 2.5) < 1e-12,
              "r = 5/7 (0.714) -> nbar = 2.5 exactly via r/(1-r)");
    return c;
}

// 12. Ising range exponent: pseudopotential vs Floquet spectra
Check criterion_ising_range(int) {
    Check c;
    const IonSpecies yb = IonSpecies::ytterbium_171();
    const double theta = 53.0 * constants::pi / 180.0;
    for (const auto& [n, alpha] :
         std::vector<std::pair<int, double>>{{7, 2.0}, {19, 2.5}}) {
        const TrapConfig trap = trap_at_alpha(alpha);
        const RfModel rf = rf_model(trap, yb);
        const PotentialModel model = rf.pseudo(n);
        const auto eq = find_equilibrium(model, 3);
        const auto pseudo = pseudopotential_modes(eq, model, ModeSubspace::Axial);
        const auto orbit = find_periodic_orbit(rf, eq);
        const auto floquet = floquet_modes(orbit, ModeSubspace::Axial);

        const double mu = pseudo.frequencies[n - 1] + two_pi * 20e3;
        const double rabi = two_pi * 100e3;
        auto exponent = [&](const ModeSpectrum& spec) {
            Eigen::VectorXd eta(n);
            for (int k = 0; k < n; ++k)
                eta[k] = lamb_dicke(yb, theta, spec.frequencies[k]);
            return spin_spin_couplings(spec, eta, eq.positions, mu, rabi)
                .range_exponent;
        };
        const double p_pseudo = exponent(pseudo);
        const double p_floquet = exponent(floquet);
        std::ostringstream v;
        v << "N=" << n << ": p_pseudo = " << p_pseudo
          << ", p_floquet = " << p_floquet;
        c.require(std::abs(p_pseudo - p_floquet) / p_pseudo <= 0.005, v.str());
    }
    return c;
}

// 13. numerics hygiene
Check criterion_numerics(int) {
    Check c;
    const IonSpecies yb = IonSpecies::ytterbium_171();
    const PotentialModel model{two_pi * 450e3, two_pi * 459e3, two_pi * 900e3,
                               yb, 5};
    const double l = length_scale(model);
    std::mt19937_64 rng(5150);
    std::normal_distribution<double> gauss(0.0, 1.0);
    PositionMatrix p(5, 3);
    for (int i = 0; i < 5; ++i)
        for (int k = 0; k < 3; ++k) p(i, k) = 1.2 * l * gauss(rng);

    // gradient and hessian finite differences at 1e-5 relative
    const PositionMatrix g = potential_gradient(p, model);
    const Eigen::MatrixXd h = potential_hessian(p, model);
    const double gscale = g.cwiseAbs().maxCoeff();
    const double hscale = h.cwiseAbs().maxCoeff();
    const double step = 1e-9;
    double worst_g = 0.0, worst_h = 0.0;
    for (int ccol = 0; ccol < 15; ++ccol) {
        PositionMatrix pp = p, pm = p;
        pp(ccol / 3, ccol % 3) += step;
        pm(ccol / 3, ccol % 3) -= step;
        const double fd_g = (total_potential(pp, model) -
                             total_potential(pm, model)) /
                            (2 * step);
        worst_g = std::max(worst_g,
                           std::abs(g(ccol / 3, ccol % 3) - fd_g) / gscale);
        const PositionMatrix gp = potential_gradient(pp, model);
        const PositionMatrix gm = potential_gradient(pm, model);
        for (int r = 0; r < 15; ++r) {
            const double fd_h =
                (gp(r / 3, r % 3) - gm(r / 3, r % 3)) / (2 * step);
            worst_h = std::max(worst_h, std::abs(h(r, ccol) - fd_h) / hscale);
        }
    }
    std::ostringstream v;
    v << "FD gradient " << worst_g << ", FD hessian " << worst_h;
    c.require(worst_g < 1e-5 && worst_h < 1e-5, v.str());

    // monodromy symplecticity
    const TrapConfig trap = trap_at_alpha(2.0);
    const RfModel rf = rf_model(trap, yb);
    const auto eq = find_equilibrium(rf.pseudo(7), 3);
    const auto orbit = find_periodic_orbit(rf, eq);
    const Eigen::MatrixXd m = monodromy_matrix(orbit, ModeSubspace::Full);
    const int d = static_cast<int>(m.rows()) / 2;
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * d, 2 * d);
    j.topRightCorner(d, d).setIdentity();
    j.bottomLeftCorner(d, d) = -Eigen::MatrixXd::Identity(d, d);
    const double defect = (m.transpose() * j * m - j).cwiseAbs().maxCoeff();
    std::ostringstream w;
    w << "symplectic defect " << defect;
    c.require(defect < 1e-8, w.str());

    // MD timestep halving over 20 rf periods
    const auto system = MdSystem::from_trap(trap, yb, 7);
    PositionMatrix x0 = eq.positions;
    x0(0, 0) += 0.02 * length_scale(system.pseudo);
    const PositionMatrix v0 = PositionMatrix::Zero(7, 3);
    auto run = [&](double steps_per_period) {
        SimulationParams params;
        params.timestep = system.rf.rf_period() / steps_per_period;
        params.duration = 20.0 * system.rf.rf_period();
        params.record_stride = static_cast<int>(20 * steps_per_period);
        return integrate(system, x0, v0, {}, params).positions.back();
    };
    const double diff =
        (run(400) - run(800)).cwiseAbs().maxCoeff();
    std::ostringstream u;
    u << "timestep-halving displacement change " << diff / l << " l";
    c.require(diff < 1e-4 * length_scale(system.pseudo), u.str());
    return c;
}

struct Criterion {
    int id;
    const char* name;
    std::function<Check(int)> run;
};

} // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            std::ostream& log) {
    const std::vector<Criterion> criteria = {
        {1, "Mathieu parameter q", criterion_mathieu_q},
        {2, "Lamb-Dicke parameter", criterion_lamb_dicke},
        {3, "power-broadened Lorentzian width", criterion_lorentz_width},
        {4, "heating-rate conversion chain", criterion_conversions},
        {5, "axial COM invariance N=1..19", criterion_axial_com},
        {6, "single-ion Floquet vs Mathieu oracle", criterion_mathieu_oracle},
        {7, "7-ion axial mode discrepancy", criterion_mode_discrepancy},
        {8, "phase diagram boundaries", criterion_phase_diagram},
        {9, "13-ion micromotion vs pseudopotential", criterion_micromotion},
        {10, "heating anisotropy", criterion_heating_anisotropy},
        {11, "thermometry round trips", criterion_thermometry},
        {12, "Ising range exponent consistency", criterion_ising_range},
        {13, "numerics hygiene", criterion_numerics},
    };

    std::vector<CriterionResult> results;
    for (const auto& criterion : criteria) {
        if (!options.only.empty() &&
            std::find(options.only.begin(), options.only.end(), criterion.id) ==
                options.only.end())
            continue;
        const auto start = std::chrono::steady_clock::now();
        Check check;
        try {
            check = criterion.run(options.threads);
        } catch (const std::exception& e) {
            check.ok = false;
            check.detail << "exception: " << e.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          start)
                .count();
        results.push_back({criterion.id, criterion.name, check.ok,
                           check.detail.str(), seconds});
        log << (check.ok ? "[PASS]" : "[FAIL]") << " criterion "
            << criterion.id << ": " << criterion.name << " — "
            << check.detail.str() << "(" << seconds << " s)\n";
        log.flush();
    }
    return results;
}

} // namespace icsim
