#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "icsim/constants.hpp"
#include "icsim/equilibrium.hpp"
#include "icsim/errors.hpp"
#include "icsim/phases.hpp"

using namespace icsim;

namespace {

constexpr double two_pi = 2.0 * constants::pi;

PhaseScanOptions degenerate_options() {
    PhaseScanOptions opt;
    opt.epsilon = 1.0;
    return opt;
}

} // namespace

TEST_CASE("single ion classifies as linear by convention") {
    const PotentialModel m{two_pi * 450e3, two_pi * 459e3, two_pi * 900e3,
                           IonSpecies::ytterbium_171(), 1};
    const auto config = find_equilibrium(m);
    CHECK(classify(config, m).phase == Phase::Linear);
}

TEST_CASE("13 ions: linear at low alpha, radial-2d at high alpha") {
    PhaseScanOptions opt;
    const auto low = sweep_model(13, 0.05, opt);
    const auto chain = find_equilibrium(low, 2);
    REQUIRE(chain.converged);
    CHECK(classify(chain, low).phase == Phase::Linear);

    const auto high = sweep_model(13, 4.5, opt);
    const auto flat = find_equilibrium(high, 2);
    REQUIRE(flat.converged);
    const auto label = classify(flat, high);
    CHECK(label.phase == Phase::Radial2D);
    CHECK(label.axial < 1e-3);
    CHECK(label.radial_major > 1.0);
}

TEST_CASE("intermediate alpha passes through zigzag and 3d phases") {
    PhaseScanOptions opt;
    // zigzag: just above the chain instability for N=5
    const auto zz_model = sweep_model(5, 0.55, opt);
    const auto zz = find_equilibrium(zz_model, 4);
    REQUIRE(zz.converged);
    CHECK(classify(zz, zz_model).phase == Phase::ZigZag);

    const auto mid_model = sweep_model(13, 1.2, opt);
    const auto mid = find_equilibrium(mid_model, 4);
    REQUIRE(mid.converged);
    CHECK(classify(mid, mid_model).phase == Phase::ThreeD);
}

TEST_CASE("classification rejects unconverged configurations") {
    const PotentialModel m{two_pi * 450e3, two_pi * 459e3, two_pi * 900e3,
                           IonSpecies::ytterbium_171(), 2};
    CrystalConfiguration config;
    config.positions = PositionMatrix::Zero(2, 3);
    config.positions(0, 0) = 1e-6;
    config.converged = false;
    CHECK_THROWS_AS(classify(config, m), UnconvergedInput);
}

TEST_CASE("labels are rotation-invariant for a degenerate trap") {
    const PotentialModel m{two_pi * 450e3, two_pi * 450e3, two_pi * 2000e3,
                           IonSpecies::ytterbium_171(), 5};
    const auto config = find_equilibrium(m, 6);
    REQUIRE(config.converged);
    const Phase base = classify(config, m).phase;
    for (double angle : {0.3, 1.1, 2.7}) {
        CrystalConfiguration rotated = config;
        const double c = std::cos(angle), s = std::sin(angle);
        for (int i = 0; i < 5; ++i) {
            const double x = config.positions(i, 0);
            const double y = config.positions(i, 1);
            rotated.positions(i, 0) = c * x - s * y;
            rotated.positions(i, 1) = s * x + c * y;
        }
        CHECK(classify(rotated, m).phase == base);
    }
}

TEST_CASE("3-ion chain boundary matches the analytic soft mode") {
    // degenerate radial limit: alpha_c = sqrt(5/12)
    const auto point =
        critical_alpha(3, Boundary::LinearToZigZag, Method::Pseudopotential,
                       degenerate_options());
    CHECK(point.bracket_width <= 1e-3);
    CHECK(std::abs(point.alpha_critical - std::sqrt(5.0 / 12.0)) < 1e-3);

    // with the asymmetry split the soft axis is omega_y = omega_r / eps
    PhaseScanOptions split;
    split.epsilon = 1.02;
    const auto split_point = critical_alpha(3, Boundary::LinearToZigZag,
                                            Method::Pseudopotential, split);
    CHECK(std::abs(split_point.alpha_critical -
                   std::sqrt(5.0 / 12.0) / 1.02) < 1e-3);
}

TEST_CASE("3-ion planar boundary sits at alpha = 1 in the degenerate limit") {
    const auto point =
        critical_alpha(3, Boundary::ThreeDToRadial2D, Method::Pseudopotential,
                       degenerate_options());
    CHECK(std::abs(point.alpha_critical - 1.0) < 1e-3);
}

TEST_CASE("soft-mode and classification bisections agree") {
    PhaseScanOptions opt;
    opt.epsilon = 1.02;
    for (const Boundary boundary :
         {Boundary::LinearToZigZag, Boundary::ThreeDToRadial2D}) {
        const auto soft =
            critical_alpha(4, boundary, Method::Pseudopotential, opt);
        const auto label = critical_alpha_by_classification(4, boundary, opt);
        CHECK(std::abs(soft.alpha_critical - label.alpha_critical) <=
              5.0 * opt.tol_alpha);
    }
}

TEST_CASE("classification flips across the boundary") {
    PhaseScanOptions opt;
    const auto point = critical_alpha(4, Boundary::ThreeDToRadial2D,
                                      Method::Pseudopotential, opt);
    const double delta = 2.0 * opt.tol_alpha;
    const auto below = sweep_model(4, point.alpha_critical - delta, opt);
    const auto above = sweep_model(4, point.alpha_critical + delta, opt);
    const auto c_below = find_equilibrium(below, 1);
    const auto c_above = find_equilibrium(above, 1);
    REQUIRE(c_below.converged);
    REQUIRE(c_above.converged);
    CHECK(classify(c_below, below).phase != Phase::Radial2D);
    CHECK(classify(c_above, above).phase == Phase::Radial2D);
}

TEST_CASE("boundaries move apart with ion number") {
    PhaseScanOptions opt;
    double prev_zz = 1e9, prev_2d = 0.0;
    for (int n : {3, 5, 7}) {
        const auto zz = critical_alpha(n, Boundary::LinearToZigZag,
                                       Method::Pseudopotential, opt);
        const auto p2d = critical_alpha(n, Boundary::ThreeDToRadial2D,
                                        Method::Pseudopotential, opt);
        CHECK(zz.alpha_critical < prev_zz);
        CHECK(p2d.alpha_critical > prev_2d);
        CHECK(zz.alpha_critical < p2d.alpha_critical);
        prev_zz = zz.alpha_critical;
        prev_2d = p2d.alpha_critical;
    }
}

TEST_CASE("Floquet and pseudopotential boundaries nearly coincide at N=3") {
    PhaseScanOptions opt;
    const auto ps = critical_alpha(3, Boundary::ThreeDToRadial2D,
                                   Method::Pseudopotential, opt);
    const auto fl =
        critical_alpha(3, Boundary::ThreeDToRadial2D, Method::Floquet, opt);
    CHECK(std::abs(fl.alpha_critical - ps.alpha_critical) / ps.alpha_critical <
          0.1);

    const auto zz_ps = critical_alpha(3, Boundary::LinearToZigZag,
                                      Method::Pseudopotential, opt);
    const auto zz_fl =
        critical_alpha(3, Boundary::LinearToZigZag, Method::Floquet, opt);
    CHECK(std::abs(zz_fl.alpha_critical - zz_ps.alpha_critical) /
              zz_ps.alpha_critical <
          0.02);
}

TEST_CASE("out-of-bracket search reports NoTransitionFound") {
    PhaseScanOptions opt;
    opt.alpha_lo = 3.0;
    opt.alpha_hi = 5.0; // N=3 planar boundary is near 1
    CHECK_THROWS_AS(critical_alpha(3, Boundary::ThreeDToRadial2D,
                                   Method::Pseudopotential, opt),
                    NoTransitionFound);
    CHECK_THROWS_AS(critical_alpha(2, Boundary::LinearToZigZag,
                                   Method::Pseudopotential, opt),
                    ValidationError);
}

TEST_CASE("phase diagram sweep collects both boundaries per N") {
    PhaseScanOptions opt;
    const auto diagram = phase_diagram(3, 5, Method::Pseudopotential, opt);
    CHECK(diagram.failures.empty());
    REQUIRE(diagram.points.size() == 6);
    // ordered by (N, boundary)
    CHECK(diagram.points[0].n_ions == 3);
    CHECK(diagram.points[0].boundary == Boundary::LinearToZigZag);
    CHECK(diagram.points[1].boundary == Boundary::ThreeDToRadial2D);
    for (const auto& p : diagram.points)
        CHECK(p.bracket_width <= opt.tol_alpha);
}
