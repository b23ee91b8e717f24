#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "icsim/constants.hpp"
#include "icsim/equilibrium.hpp"
#include "icsim/errors.hpp"
#include "icsim/trap.hpp"

using namespace icsim;

namespace {

constexpr double two_pi = 2.0 * constants::pi;

PotentialModel model(int n, double fx, double fy, double fz) {
    return PotentialModel{two_pi * fx, two_pi * fy, two_pi * fz,
                          IonSpecies::ytterbium_171(), n};
}

double coulomb_kq2() {
    const IonSpecies yb = IonSpecies::ytterbium_171();
    return constants::coulomb_constant * yb.charge * yb.charge;
}

} // namespace

TEST_CASE("single ion sits at the origin with zero energy") {
    const auto config = find_equilibrium(model(1, 450e3, 460e3, 900e3));
    CHECK(config.converged);
    CHECK(config.positions.norm() == 0.0);
    CHECK(config.energy == 0.0);
}

TEST_CASE("two-ion spacing matches the analytic force balance") {
    // omega_x weakest: ions align along x with d^3 = 2 k Q^2 / (m omega_x^2)
    const auto m = model(2, 450e3, 470e3, 900e3);
    const double d = std::cbrt(2.0 * coulomb_kq2() /
                               (m.species.mass * m.omega_x * m.omega_x));
    CHECK(d == doctest::Approx(5.88e-6).epsilon(0.01)); // ~5-6 um spacings

    const auto config = find_equilibrium(m, 7);
    REQUIRE(config.converged);
    const double spacing = (config.positions.row(0) - config.positions.row(1)).norm();
    CHECK(spacing == doctest::Approx(d).epsilon(1e-9));
    CHECK(std::abs(config.positions(0, 0)) == doctest::Approx(d / 2).epsilon(1e-8));
    CHECK(std::abs(config.positions(0, 1)) < 1e-12);
    CHECK(std::abs(config.positions(0, 2)) < 1e-12);

    // energy at the minimum: (1/4) m w_x^2 d^2 + k Q^2 / d
    const double expected = 0.25 * m.species.mass * m.omega_x * m.omega_x * d * d +
                            coulomb_kq2() / d;
    CHECK(config.energy == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("three ions in a stiff axial trap form the analytic triangle") {
    const auto m = model(3, 450e3, 450e3, 2250e3); // degenerate radial limit
    const double s = std::cbrt(3.0 * coulomb_kq2() /
                               (m.species.mass * m.omega_x * m.omega_x));
    const auto config = find_equilibrium(m, 3);
    REQUIRE(config.converged);

    std::vector<double> sides;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            sides.push_back((config.positions.row(i) - config.positions.row(j)).norm());
    for (double side : sides) CHECK(side == doctest::Approx(s).epsilon(1e-6));
    for (int i = 0; i < 3; ++i) CHECK(std::abs(config.positions(i, 2)) < 1e-12);

    // hand-evaluated energy of the equilateral triangle
    const double expected = 0.5 * m.species.mass * m.omega_x * m.omega_x * s * s +
                            3.0 * coulomb_kq2() / s;
    const PositionMatrix p = config.positions;
    CHECK(total_potential(p, m) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("gradient matches central finite differences") {
    const auto m = model(5, 450e3, 460e3, 900e3);
    const double l = length_scale(m);
    std::mt19937_64 rng(42);
    std::normal_distribution<double> gauss(0.0, 1.0);
    PositionMatrix p(5, 3);
    for (int i = 0; i < 5; ++i)
        for (int k = 0; k < 3; ++k) p(i, k) = 1.2 * l * gauss(rng);

    const PositionMatrix g = potential_gradient(p, m);
    const double h = 1e-9; // m
    const double scale = g.cwiseAbs().maxCoeff();
    for (int i = 0; i < 5; ++i) {
        for (int k = 0; k < 3; ++k) {
            PositionMatrix pp = p, pm = p;
            pp(i, k) += h;
            pm(i, k) -= h;
            const double fd = (total_potential(pp, m) - total_potential(pm, m)) / (2 * h);
            CHECK(std::abs(g(i, k) - fd) < 1e-6 * scale);
        }
    }
}

TEST_CASE("internal Coulomb forces cancel pairwise") {
    const auto m = model(4, 450e3, 460e3, 900e3);
    const double l = length_scale(m);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(0.0, 1.0);
    PositionMatrix p(4, 3);
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 3; ++k) p(i, k) = l * gauss(rng);

    const PositionMatrix g = potential_gradient(p, m);
    const Eigen::Vector3d w2(m.omega_x * m.omega_x, m.omega_y * m.omega_y,
                             m.omega_z * m.omega_z);
    for (int k = 0; k < 3; ++k) {
        const double trap_part = m.species.mass * w2[k] * p.col(k).sum();
        CHECK(g.col(k).sum() == doctest::Approx(trap_part).epsilon(1e-10));
    }
}

TEST_CASE("hessian: single ion, symmetry and finite differences") {
    const auto m1 = model(1, 450e3, 460e3, 900e3);
    PositionMatrix origin = PositionMatrix::Zero(1, 3);
    const Eigen::MatrixXd h1 = potential_hessian(origin, m1);
    CHECK(h1(0, 0) == doctest::Approx(m1.species.mass * m1.omega_x * m1.omega_x));
    CHECK(h1(1, 1) == doctest::Approx(m1.species.mass * m1.omega_y * m1.omega_y));
    CHECK(h1(2, 2) == doctest::Approx(m1.species.mass * m1.omega_z * m1.omega_z));

    const auto m = model(5, 450e3, 460e3, 900e3);
    const double l = length_scale(m);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss(0.0, 1.0);
    PositionMatrix p(5, 3);
    for (int i = 0; i < 5; ++i)
        for (int k = 0; k < 3; ++k) p(i, k) = 1.1 * l * gauss(rng);

    const Eigen::MatrixXd h = potential_hessian(p, m);
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);

    // finite differences of the analytic gradient
    const double step = 1e-9;
    const double scale = h.cwiseAbs().maxCoeff();
    for (int c = 0; c < 15; ++c) {
        PositionMatrix pp = p, pm = p;
        pp(c / 3, c % 3) += step;
        pm(c / 3, c % 3) -= step;
        const PositionMatrix gp = potential_gradient(pp, m);
        const PositionMatrix gm = potential_gradient(pm, m);
        for (int r = 0; r < 15; ++r) {
            const double fd = (gp(r / 3, r % 3) - gm(r / 3, r % 3)) / (2 * step);
            CHECK(std::abs(h(r, c) - fd) < 1e-5 * scale);
        }
    }
}

TEST_CASE("coincident ions are rejected") {
    const auto m = model(2, 450e3, 460e3, 900e3);
    PositionMatrix p = PositionMatrix::Zero(2, 3);
    CHECK_THROWS_AS(total_potential(p, m), CoincidentIons);
    CHECK_THROWS_AS(potential_gradient(p, m), CoincidentIons);
    CHECK_THROWS_AS(potential_hessian(p, m), CoincidentIons);
}

TEST_CASE("frequency scaling rescales coordinates by c^(-2/3)") {
    const double c = 2.0;
    const auto m1 = model(6, 450e3, 460e3, 300e3);
    const auto m2 = model(6, c * 450e3, c * 460e3, c * 300e3);
    const auto c1 = find_equilibrium(m1, 5);
    const auto c2 = find_equilibrium(m2, 5);
    REQUIRE(c1.converged);
    REQUIRE(c2.converged);

    auto sorted_pairs = [](const PositionMatrix& p) {
        std::vector<double> d;
        for (int i = 0; i < p.rows(); ++i)
            for (int j = i + 1; j < p.rows(); ++j)
                d.push_back((p.row(i) - p.row(j)).norm());
        std::sort(d.begin(), d.end());
        return d;
    };
    const auto d1 = sorted_pairs(c1.positions);
    const auto d2 = sorted_pairs(c2.positions);
    const double factor = std::pow(c, -2.0 / 3.0);
    for (std::size_t k = 0; k < d1.size(); ++k)
        CHECK(d2[k] == doctest::Approx(d1[k] * factor).epsilon(1e-6));
}

TEST_CASE("mirror reflections preserve the minimum energy") {
    const auto m = model(7, 450e3, 459e3, 900e3);
    const auto config = find_equilibrium(m, 1);
    REQUIRE(config.converged);
    for (int axis = 0; axis < 3; ++axis) {
        PositionMatrix reflected = config.positions;
        reflected.col(axis) *= -1.0;
        CHECK(total_potential(reflected, m) ==
              doctest::Approx(config.energy).epsilon(1e-10));
    }
}

TEST_CASE("converged minima have no meaningful negative curvature") {
    const auto m = model(7, 450e3, 459e3, 900e3);
    const auto config = find_equilibrium(m, 2);
    REQUIRE(config.converged);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        potential_hessian(config.positions, m));
    const double scale = m.species.mass * m.omega_r() * m.omega_r();
    CHECK(es.eigenvalues()[0] > -1e-6 * scale);
}

TEST_CASE("identical seeds reproduce identical configurations") {
    const auto m = model(6, 450e3, 460e3, 1200e3);
    const auto a = find_equilibrium(m, 123);
    const auto b = find_equilibrium(m, 123);
    CHECK((a.positions - b.positions).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.energy == b.energy);
}

TEST_CASE("multistart result beats every structured seed refinement") {
    const auto m = model(9, 450e3, 459e3, 1400e3);
    const auto best = find_equilibrium(m, 4);
    REQUIRE(best.converged);
    for (const auto& seed : structured_seeds(m, Subspace::Full)) {
        PositionMatrix jittered = seed;
        jittered.array() += 1e-10;
        const auto refined = refine_equilibrium(m, jittered);
        if (refined.converged)
            CHECK(best.energy <= refined.energy * (1.0 + 1e-12));
    }
}

TEST_CASE("constrained subspaces keep their manifold exactly") {
    const auto m = model(5, 450e3, 460e3, 900e3);
    EquilibriumOptions axial;
    axial.subspace = Subspace::AxialLine;
    const auto chain = find_equilibrium(m, 9, axial);
    REQUIRE(chain.converged);
    CHECK(chain.positions.col(0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(chain.positions.col(1).cwiseAbs().maxCoeff() == 0.0);

    EquilibriumOptions planar;
    planar.subspace = Subspace::RadialPlane;
    const auto plane = find_equilibrium(m, 9, planar);
    REQUIRE(plane.converged);
    CHECK(plane.positions.col(2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("19-ion crystal: outer-ion micromotion near the reported scale") {
    const auto m = model(19, 450e3, 459e3, 900e3); // alpha = 2 operating point
    const auto config = find_equilibrium(m, 12);
    REQUIRE(config.converged);
    double outer = 0.0;
    for (int i = 0; i < 19; ++i)
        outer = std::max(outer, config.positions.row(i).head<2>().norm());
    const double r1 = micromotion_amplitude(0.10, outer).first_harmonic;
    CHECK(r1 > 400e-9); // reported ~500 nm for the largest crystal
    CHECK(r1 < 650e-9);
}
