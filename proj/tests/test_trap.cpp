#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "icsim/constants.hpp"
#include "icsim/errors.hpp"
#include "icsim/trap.hpp"

using namespace icsim;

namespace {

constexpr double two_pi = 2.0 * constants::pi;

// Four-rod trap used throughout: V0 = 340 V, r0 = 460 um, z0 = 335 um,
// Omega_t = 2pi x 21 MHz, kappa = 0.12.
TrapConfig reference_trap(double dc_voltage) {
    TrapConfig t;
    t.rf_voltage = 340.0;
    t.dc_voltage = dc_voltage;
    t.radial_extent = 460e-6;
    t.axial_extent = 335e-6;
    t.drive_frequency = two_pi * 21e6;
    t.geometric_factor = 0.12;
    t.radial_asymmetry = 1.02;
    return t;
}

} // namespace

TEST_CASE("mathieu coefficients at the reference operating point") {
    const IonSpecies yb = IonSpecies::ytterbium_171();
    const MathieuCoefficients c = mathieu_coefficients(reference_trap(26.5), yb);

    CHECK(c.q_x == doctest::Approx(0.10).epsilon(0.05)); // q = 0.10 +- 0.005
    CHECK(c.q_x == doctest::Approx(0.104193).epsilon(1e-4)); // frozen regression value
    CHECK(c.q_y == -c.q_x);
    CHECK(c.a_x == c.a_y);
    CHECK(c.a_x < 0.0);
    CHECK(c.a_x + c.a_y + c.a_z == 0.0); // exact, source-free static potential
}

TEST_CASE("zero dc voltage gives zero static coefficients") {
    const IonSpecies yb = IonSpecies::ytterbium_171();
    const MathieuCoefficients c = mathieu_coefficients(reference_trap(0.0), yb);
    CHECK(c.a_x == 0.0);
    CHECK(c.a_y == 0.0);
    CHECK(c.a_z == 0.0);
}

TEST_CASE("axial frequency round trip through the endcap voltage") {
    const IonSpecies yb = IonSpecies::ytterbium_171();
    TrapConfig t = reference_trap(0.0);

    const double target = two_pi * 900e3;
    const double u0 = dc_voltage_for_axial_frequency(target, t, yb);
    CHECK(u0 == doctest::Approx(26.5).epsilon(0.01)); // the 26.5 V operating point

    t.dc_voltage = u0;
    const SecularFrequencies f = secular_frequencies(t, yb);
    CHECK(std::abs(f.omega_z - target) / target < 1e-9);
}

TEST_CASE("pure rf trap: omega_r matches the lowest-order q/sqrt(8) law") {
    const IonSpecies yb = IonSpecies::ytterbium_171();
    TrapConfig t = reference_trap(0.0);
    t.radial_asymmetry = 1.0;
    t.rf_voltage = rf_voltage_for_mathieu_q(0.10, t, yb);

    const SecularFrequencies f = secular_frequencies(t, yb);
    const double lowest_order = 0.10 / std::sqrt(8.0) * t.drive_frequency;
    CHECK(f.omega_r == doctest::Approx(lowest_order).epsilon(1e-12));
    CHECK(f.omega_r == doctest::Approx(two_pi * 742.5e3).epsilon(1e-3));
    CHECK(f.omega_x == f.omega_y);
}

TEST_CASE("alpha is the axial-to-radial frequency ratio") {
    const IonSpecies yb = IonSpecies::ytterbium_171();
    TrapConfig t = reference_trap(0.0);
    t.dc_voltage = dc_voltage_for_alpha(2.0, t, yb);
    const SecularFrequencies f = secular_frequencies(t, yb);
    CHECK(f.alpha == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f.omega_z == doctest::Approx(2.0 * f.omega_r).epsilon(1e-12));
}

TEST_CASE("seven-ion operating point: omega_z = 2pi x 900 kHz at alpha = 2") {
    const IonSpecies yb = IonSpecies::ytterbium_171();
    TrapConfig t = reference_trap(0.0);
    t.dc_voltage = dc_voltage_for_alpha(2.0, t, yb);
    const SecularFrequencies f = secular_frequencies(t, yb);
    CHECK(f.omega_z == doctest::Approx(two_pi * 900e3).epsilon(0.02));
    CHECK(f.omega_r == doctest::Approx(two_pi * 450e3).epsilon(0.02));
}

TEST_CASE("closed-form secular frequencies equal the beta-based values") {
    const IonSpecies yb = IonSpecies::ytterbium_171();
    TrapConfig t = reference_trap(14.0);
    t.radial_asymmetry = 1.0;
    const auto [wr, wz] = secular_frequencies_closed_form(t, yb);
    const SecularFrequencies f = secular_frequencies(t, yb);
    CHECK(wr == doctest::Approx(f.omega_r).epsilon(1e-12));
    CHECK(wz == doctest::Approx(f.omega_z).epsilon(1e-12));
}

TEST_CASE("radial asymmetry splits omega_x/omega_y at fixed ratio") {
    const IonSpecies yb = IonSpecies::ytterbium_171();
    TrapConfig t = reference_trap(10.0);
    t.radial_asymmetry = 1.02;
    const SecularFrequencies f = secular_frequencies(t, yb);
    CHECK(f.omega_x / f.omega_y == doctest::Approx(1.02).epsilon(1e-12));
    CHECK(f.omega_r == f.omega_x);
    CHECK(f.omega_x == doctest::Approx(f.beta_x * t.drive_frequency / 2).epsilon(1e-15));
}

TEST_CASE("over-squeezed trap throws UnstableTrap") {
    const IonSpecies yb = IonSpecies::ytterbium_171();
    CHECK_THROWS_AS(secular_frequencies(reference_trap(400.0), yb),
                    UnstableTrap);
}

TEST_CASE("first-order trajectory: q = 0 reduces to a pure cosine") {
    const double W = two_pi * 21e6;
    const double a = 0.01; // harmonic limit, omega = sqrt(a) W / 2
    const double omega = std::sqrt(a) * W / 2.0;
    for (double t : {0.0, 1e-7, 3.7e-7, 9e-7}) {
        CHECK(single_ion_trajectory(a, 0.0, W, 1e-6, 0.0, t) ==
              doctest::Approx(1e-6 * std::cos(omega * t)).epsilon(1e-12));
    }
}

TEST_CASE("first-order trajectory at t = 0 carries the micromotion factors") {
    const double u0 = single_ion_trajectory(0.0, 0.10, two_pi * 21e6, 1e-6, 0.0, 0.0);
    CHECK(u0 == doctest::Approx(1.0503125e-6).epsilon(1e-9)); // A (1 + q/2 + q^2/32)
}

TEST_CASE("first-order trajectory time-averages to zero over a secular period") {
    const double W = two_pi * 21e6;
    const double q = 0.10;
    const double beta = std::sqrt(q * q / 2.0);
    const double period = 2.0 * two_pi / (beta * W);
    // midpoint quadrature
    const int n = 20000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = period * (i + 0.5) / n;
        sum += single_ion_trajectory(0.0, q, W, 1e-6, 0.0, t);
    }
    CHECK(std::abs(sum / n) < 5e-3 * 1e-6);
}

TEST_CASE("lamb-dicke parameter at the Raman geometry") {
    const IonSpecies yb = IonSpecies::ytterbium_171();
    const double theta = 53.0 * constants::pi / 180.0;
    const double eta = lamb_dicke(yb, theta, two_pi * 900e3);
    CHECK(eta == doctest::Approx(0.16).epsilon(0.032)); // 0.16 +- 0.005
    CHECK(eta == doctest::Approx(0.162033).epsilon(1e-4)); // frozen

    CHECK(lamb_dicke(yb, 0.0, two_pi * 900e3) == 0.0);
    // eta ~ omega^{-1/2}
    CHECK(lamb_dicke(yb, theta, 4.0 * two_pi * 900e3) ==
          doctest::Approx(eta / 2.0).epsilon(1e-12));
}

TEST_CASE("lamb-dicke is strictly decreasing in omega") {
    const IonSpecies yb = IonSpecies::ytterbium_171();
    double prev = lamb_dicke(yb, 0.5, two_pi * 100e3);
    for (double f = 200e3; f < 3e6; f *= 1.5) {
        const double eta = lamb_dicke(yb, 0.5, two_pi * f);
        CHECK(eta < prev);
        prev = eta;
    }
}

TEST_CASE("micromotion amplitudes") {
    const auto mm = micromotion_amplitude(0.10, 6e-6);
    CHECK(mm.first_harmonic == doctest::Approx(300e-9).epsilon(1e-12));
    CHECK(mm.second_harmonic == doctest::Approx(6e-6 * 0.01 / 32.0).epsilon(1e-12));

    const auto origin = micromotion_amplitude(0.10, 0.0);
    CHECK(origin.first_harmonic == 0.0);

    // linear in the radial coordinate
    CHECK(micromotion_amplitude(0.10, 12e-6).first_harmonic ==
          doctest::Approx(2.0 * mm.first_harmonic).epsilon(1e-12));

    // outer-ion scaling estimate ~ q d sqrt(N) / 4
    CHECK(micromotion_scaling_estimate(0.10, 5e-6, 19) ==
          doctest::Approx(545e-9).epsilon(0.01));
}
