#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "icsim/constants.hpp"
#include "icsim/equilibrium.hpp"
#include "icsim/errors.hpp"
#include "icsim/faddeeva.hpp"
#include "icsim/modes.hpp"
#include "icsim/stats.hpp"
#include "icsim/thermometry.hpp"

using namespace icsim;

namespace {

constexpr double two_pi = 2.0 * constants::pi;

Eigen::VectorXd detuning_grid(double span, int n) {
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) g[i] = -span + 2.0 * span * i / (n - 1);
    return g;
}

} // namespace

TEST_CASE("power-broadened Lorentzian width") {
    const IonSpecies yb = IonSpecies::ytterbium_171();
    const double width = lorentz_fwhm(yb, 0.3);
    CHECK(width == doctest::Approx(two_pi * 22e6).epsilon(0.02));
    CHECK(width == doctest::Approx(two_pi * 22.3475e6).epsilon(1e-4)); // frozen
}

TEST_CASE("Doppler width at 3 mK and 45 degrees") {
    const IonSpecies yb = IonSpecies::ytterbium_171();
    const double theta = constants::pi / 4.0;
    // hand-computed: 4.4447e7 * sqrt(0.003) Hz = 2.4345 MHz
    CHECK(doppler_fwhm(3e-3, 3e-3, theta, yb) ==
          doctest::Approx(two_pi * 2.4345e6).epsilon(2e-4));
    // T_z contributes nothing at theta = 0
    CHECK(doppler_fwhm(3e-3, 10.0, 0.0, yb) ==
          doctest::Approx(doppler_fwhm(3e-3, 0.0, 0.0, yb)).epsilon(1e-12));
}

TEST_CASE("faddeeva function matches quadrature to 1e-6") {
    // midpoint oracle for w(x + iy), y > 0
    auto oracle = [](double x, double y) {
        const double span = std::abs(x) + 40.0;
        const int n = 400000;
        const double h = 2.0 * span / n;
        double re = 0.0;
        for (int i = 0; i < n; ++i) {
            const double t = -span + (i + 0.5) * h;
            const double g = std::exp(-t * t);
            re += g / ((x - t) * (x - t) + y * y);
        }
        return re * h * y / constants::pi;
    };
    for (double y : {0.05, 0.4, 1.3, 6.0, 30.0}) {
        for (double x : {0.0, 0.7, 2.2, 7.9, 25.0}) {
            const double w = faddeeva_w({x, y}).real();
            CHECK(std::abs(w - oracle(x, y)) / oracle(x, y) < 1e-6);
        }
    }
}

TEST_CASE("zero temperature gives a pure Lorentzian") {
    const IonSpecies yb = IonSpecies::ytterbium_171();
    const auto profile = voigt_profile(detuning_grid(two_pi * 100e6, 201), 0.0,
                                       0.0, constants::pi / 4, yb, 0.3, 2.0, 0.1);
    const double gamma = 0.5 * profile.lorentz_fwhm;
    for (int i = 0; i < profile.detunings.size(); ++i) {
        const double x = profile.detunings[i];
        const double lorentz =
            0.1 + 2.0 * gamma * gamma / (x * x + gamma * gamma);
        CHECK(profile.intensities[i] == doctest::Approx(lorentz).epsilon(1e-9));
    }
}

TEST_CASE("voigt FWHM sits between the component widths and their sum") {
    const IonSpecies yb = IonSpecies::ytterbium_171();
    for (double t : {3e-3, 0.1, 1.0}) {
        const auto profile =
            voigt_profile(detuning_grid(two_pi * 500e6, 4001), t, t,
                          constants::pi / 4, yb, 0.3);
        // locate FWHM numerically
        double half_width = 0.0;
        for (int i = 2000; i < 4001; ++i) {
            if (profile.intensities[i] < 0.5) {
                half_width = profile.detunings[i];
                break;
            }
        }
        const double fwhm = 2.0 * half_width;
        CHECK(fwhm >= std::max(profile.lorentz_fwhm, profile.gauss_fwhm));
        CHECK(fwhm <= 1.02 * (profile.lorentz_fwhm + profile.gauss_fwhm));
    }
}

TEST_CASE("voigt fit recovers synthetic radial temperatures") {
    const IonSpecies yb = IonSpecies::ytterbium_171();
    const double theta = constants::pi / 4;
    const double width = lorentz_fwhm(yb, 0.3);
    std::mt19937_64 rng(321);
    std::normal_distribution<double> gauss(0.0, 1.0);

    for (double t_r : {3e-3, 30e-3, 300e-3}) {
        auto profile = voigt_profile(detuning_grid(two_pi * 250e6, 601), t_r,
                                     3e-3, theta, yb, 0.3, 1000.0, 50.0);
        for (int i = 0; i < profile.intensities.size(); ++i)
            profile.intensities[i] += 10.0 * gauss(rng); // 1 % of amplitude
        const auto fit = fit_voigt(profile, width, theta, 3e-3, yb);
        CHECK(!fit.degenerate);
        CHECK(fit.t_radial == doctest::Approx(t_r).epsilon(0.10));
    }
}

TEST_CASE("zero-temperature synthetic returns an upper bound, not negative") {
    const IonSpecies yb = IonSpecies::ytterbium_171();
    const double theta = constants::pi / 4;
    const double width = lorentz_fwhm(yb, 0.3);
    auto profile = voigt_profile(detuning_grid(two_pi * 250e6, 301), 0.0, 0.0,
                                 theta, yb, 0.3, 1000.0, 0.0);
    const auto fit = fit_voigt(profile, width, theta, 0.0, yb);
    CHECK(fit.degenerate);
    CHECK(fit.t_radial >= 0.0);
}

TEST_CASE("heating-time sequence recovers the 1.04 K/s slope") {
    const IonSpecies yb = IonSpecies::ytterbium_171();
    const double theta = constants::pi / 4;
    const double width = lorentz_fwhm(yb, 0.3);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<double> heat_times = {0.0, 80e-3, 160e-3};
    std::vector<double> fitted;
    for (double t : heat_times) {
        const double t_r = 3e-3 + 1.04 * t;
        auto profile = voigt_profile(detuning_grid(two_pi * 400e6, 801), t_r,
                                     3e-3, theta, yb, 0.3, 1000.0, 20.0);
        for (int i = 0; i < profile.intensities.size(); ++i)
            profile.intensities[i] += 10.0 * gauss(rng);
        fitted.push_back(fit_voigt(profile, width, theta, 3e-3, yb).t_radial);
    }
    const LinearFit fit = fit_line(heat_times, fitted);
    CHECK(fit.slope == doctest::Approx(1.04).epsilon(0.10));
}

TEST_CASE("sideband flopping: limits and thermal-ratio extraction") {
    const double eta = 0.16;
    const double rabi = two_pi * 50e3;
    std::vector<double> times;
    for (int i = 0; i <= 60; ++i)
        times.push_back(i * 0.4 / (eta * rabi));

    // ground state: red sideband flat at zero
    const auto ground = sideband_flops(0.0, eta, rabi, times);
    for (double p : ground.red) CHECK(p == 0.0);
    CHECK(ground.ratio == 0.0);

    // ratio saturates toward 1 as nbar grows
    const auto hot = sideband_flops(400.0, eta, rabi, times);
    CHECK(hot.ratio > 0.99);

    // nbar = 2.5 operating point: r = 2.5/3.5
    const auto scan = sideband_flops(2.5, eta, rabi, times);
    CHECK(scan.ratio == doctest::Approx(2.5 / 3.5).epsilon(1e-3));
    CHECK(scan.nbar == doctest::Approx(2.5).epsilon(2e-3));
}

TEST_CASE("extracted ratio equals the analytic thermal ratio to 1e-3") {
    const double eta = 0.12;
    const double rabi = two_pi * 40e3;
    for (double nbar : {0.5, 2.5, 8.0, 20.0}) {
        std::vector<double> times;
        const double t_scale = 1.0 / (eta * rabi * std::sqrt(nbar + 1.0));
        for (int i = 0; i <= 80; ++i) times.push_back(i * 0.05 * t_scale * 8);
        const auto scan = sideband_flops(nbar, eta, rabi, times);
        CHECK(std::abs(scan.ratio - nbar / (nbar + 1.0)) < 1e-3);
    }
}

TEST_CASE("ratio to nbar map") {
    CHECK(ratio_to_nbar(0.0) == 0.0);
    CHECK(ratio_to_nbar(0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ratio_to_nbar(5.0 / 7.0) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(ratio_to_nbar(0.714) == doctest::Approx(0.714 / 0.286).epsilon(1e-12));
    CHECK(ratio_to_nbar(0.714) == doctest::Approx(2.5).epsilon(0.002));
    CHECK_THROWS_AS(ratio_to_nbar(1.0), InvalidRatio);
    CHECK_THROWS_AS(ratio_to_nbar(-0.1), InvalidRatio);
}

TEST_CASE("heating-rate conversions against the reported numbers") {
    const IonSpecies yb = IonSpecies::ytterbium_171();
    const double omega = two_pi * 900e3;
    const auto c = heating_conversions(100.0, omega, yb);
    // exact formula values (paper quotes 0.004 K/s and 2.65e-12)
    CHECK(c.temperature_rate == doctest::Approx(4.3193e-3).epsilon(1e-4));
    CHECK(c.field_noise_density == doctest::Approx(2.6377e-12).epsilon(1e-4));
    CHECK(std::abs(c.field_noise_density - 2.65e-12) / 2.65e-12 < 0.05);

    const auto zero = heating_conversions(0.0, omega, yb);
    CHECK(zero.temperature_rate == 0.0);
    CHECK(zero.field_noise_density == 0.0);

    // S_E -> n_dot -> S_E round trip
    const double back = quanta_rate_from_field_noise(c.field_noise_density,
                                                     omega, yb);
    CHECK(std::abs(back - 100.0) / 100.0 < 1e-12);
}

TEST_CASE("uncorrelated-noise mode scaling") {
    CHECK(uncorrelated_mode_scaling(100.0, 5.0, 5.0) == 100.0);
    CHECK(uncorrelated_mode_scaling(100.0, 4.0, 8.0) == 50.0);

    // 7-ion crystal at alpha = 2: the lowest (zigzag) axial mode picks up
    // roughly 50 % more quanta per second than the COM mode
    const PotentialModel m{two_pi * 450e3, two_pi * 441e3, two_pi * 900e3,
                           IonSpecies::ytterbium_171(), 7};
    const auto eq = find_equilibrium(m, 3);
    REQUIRE(eq.converged);
    const auto spec = pseudopotential_modes(eq, m, ModeSubspace::Axial);
    const double boost = uncorrelated_mode_scaling(
                             1.0, spec.frequencies[6], spec.frequencies[0]);
    CHECK(boost > 1.35);
    CHECK(boost < 1.8);
}
