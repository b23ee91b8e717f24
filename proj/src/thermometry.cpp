#include "icsim/thermometry.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "icsim/constants.hpp"
#include "icsim/errors.hpp"
#include "icsim/faddeeva.hpp"

namespace icsim {

namespace {

constexpr double two_pi = 2.0 * constants::pi;
constexpr double two_ln2 = 2.0 * 0.6931471805599453;

// peak-normalized Voigt at angular detuning x for FWHM pair (gauss, lorentz)
double voigt_shape(double x, double gauss_fwhm, double lorentz_fwhm) {
    const double sigma = gauss_fwhm / (2.0 * std::sqrt(two_ln2));
    const double gamma = 0.5 * lorentz_fwhm;
    return voigt_function(x, sigma, gamma) / voigt_function(0.0, sigma, gamma);
}

// projected temperature T_r cos^2 + T_z sin^2 from a Gaussian FWHM (rad/s)
double projected_temperature(double gauss_fwhm, const IonSpecies& species) {
    const double fwhm_hz = gauss_fwhm / two_pi;
    return fwhm_hz * fwhm_hz * species.mass * species.transition_wavelength *
           species.transition_wavelength / (4.0 * two_ln2 * constants::boltzmann);
}

} // namespace

double lorentz_fwhm(const IonSpecies& species, double saturation) {
    return species.natural_linewidth * std::sqrt(1.0 + saturation);
}

double doppler_fwhm(double t_radial, double t_axial, double theta,
                    const IonSpecies& species) {
    const double projected = t_radial * std::cos(theta) * std::cos(theta) +
                             t_axial * std::sin(theta) * std::sin(theta);
    const double fwhm_hz =
        2.0 *
        std::sqrt(two_ln2 * constants::boltzmann /
                  (species.mass * species.transition_wavelength *
                   species.transition_wavelength)) *
        std::sqrt(projected);
    return two_pi * fwhm_hz;
}

LineProfile voigt_profile(const Eigen::VectorXd& grid, double t_radial,
                          double t_axial, double theta,
                          const IonSpecies& species, double saturation,
                          double amplitude, double background) {
    if (t_radial < 0.0 || t_axial < 0.0)
        throw ValidationError("temperatures must be non-negative");
    if (saturation < 0.0)
        throw ValidationError("saturation must be non-negative");
    for (int i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1])
            throw ValidationError("detuning grid must be strictly increasing");

    LineProfile profile;
    profile.detunings = grid;
    profile.amplitude = amplitude;
    profile.background = background;
    profile.lorentz_fwhm = lorentz_fwhm(species, saturation);
    profile.gauss_fwhm = doppler_fwhm(t_radial, t_axial, theta, species);
    profile.intensities.resize(grid.size());
    for (int i = 0; i < grid.size(); ++i)
        profile.intensities[i] =
            background +
            amplitude * voigt_shape(grid[i], profile.gauss_fwhm,
                                    profile.lorentz_fwhm);
    return profile;
}

VoigtFit fit_voigt(const LineProfile& data, double lorentz_width, double theta,
                   double t_axial, const IonSpecies& species) {
    const int n = static_cast<int>(data.detunings.size());
    if (n < 8) throw ValidationError("profile too short to fit");

    // parameters: center, amplitude, background, gauss fwhm (|g| used)
    Eigen::Vector4d p;
    int imax = 0;
    data.intensities.maxCoeff(&imax);
    p[0] = data.detunings[imax];
    p[2] = data.intensities.minCoeff();
    p[1] = data.intensities[imax] - p[2];
    p[3] = 0.3 * lorentz_width;

    auto model = [&](const Eigen::Vector4d& q, int i) {
        return q[2] + q[1] * voigt_shape(data.detunings[i] - q[0],
                                         std::abs(q[3]), lorentz_width);
    };
    auto residuals = [&](const Eigen::Vector4d& q, Eigen::VectorXd& r) {
        for (int i = 0; i < n; ++i) r[i] = model(q, i) - data.intensities[i];
    };

    Eigen::VectorXd r(n), r_try(n);
    residuals(p, r);
    double cost = r.squaredNorm();
    double lambda = 1e-3;
    const double scale0 = std::max(std::abs(p[1]), 1e-30);

    Eigen::MatrixXd jac(n, 4);
    Eigen::Matrix4d jtj;
    int iter = 0;
    for (; iter < 200; ++iter) {
        // numerical Jacobian
        for (int k = 0; k < 4; ++k) {
            Eigen::Vector4d q = p;
            const double h =
                1e-6 * std::max({std::abs(p[k]), 1e-3 * lorentz_width, 1e-9});
            q[k] += h;
            Eigen::VectorXd rp(n);
            residuals(q, rp);
            jac.col(k) = (rp - r) / h;
        }
        jtj = jac.transpose() * jac;
        const Eigen::Vector4d g = jac.transpose() * r;
        if (g.cwiseAbs().maxCoeff() < 1e-12 * scale0) break;

        bool improved = false;
        for (int attempt = 0; attempt < 12; ++attempt) {
            Eigen::Matrix4d a = jtj;
            for (int k = 0; k < 4; ++k) a(k, k) += lambda * jtj(k, k) + 1e-300;
            const Eigen::Vector4d step = a.ldlt().solve(-g);
            const Eigen::Vector4d q = p + step;
            residuals(q, r_try);
            const double c_try = r_try.squaredNorm();
            if (std::isfinite(c_try) && c_try < cost) {
                p = q;
                r = r_try;
                const double gain = (cost - c_try) / std::max(cost, 1e-300);
                cost = c_try;
                lambda = std::max(lambda * 0.3, 1e-12);
                improved = true;
                if (gain < 1e-14) iter = 200; // converged
                break;
            }
            lambda *= 8.0;
        }
        if (!improved) break;
    }
    if (!std::isfinite(cost))
        throw FitDiverged("Voigt fit produced non-finite residuals");

    VoigtFit fit;
    fit.center = p[0];
    fit.amplitude = p[1];
    fit.background = p[2];
    fit.gauss_fwhm = std::abs(p[3]);
    fit.iterations = iter;
    fit.rms_residual = std::sqrt(cost / n);

    // parameter covariance from the final Jacobian
    const double variance = cost / std::max(n - 4, 1);
    const Eigen::Matrix4d cov = jtj.inverse() * variance;
    const double sigma_g = std::sqrt(std::max(cov(3, 3), 0.0));

    const double grid_step =
        (data.detunings[n - 1] - data.detunings[0]) / (n - 1);
    double gauss = fit.gauss_fwhm;
    if (gauss < grid_step) {
        // unresolved Doppler width: report the resolution-limited upper bound
        fit.degenerate = true;
        gauss = grid_step;
    }
    const double t_proj = projected_temperature(gauss, species);
    const double cos2 = std::cos(theta) * std::cos(theta);
    const double sin2 = std::sin(theta) * std::sin(theta);
    fit.t_radial = std::max((t_proj - t_axial * sin2) / cos2, 0.0);
    // dT/dg = 2 T_proj / g
    fit.t_radial_uncertainty =
        2.0 * t_proj / std::max(gauss, 1e-30) * sigma_g / cos2;
    return fit;
}

SidebandScan sideband_flops(double nbar, double eta, double rabi,
                            const std::vector<double>& times) {
    if (nbar < 0.0) throw ValidationError("nbar must be non-negative");
    // Fock truncation: spec'd cap plus a hard tail bound < 1e-8
    int n_max = static_cast<int>(std::ceil(nbar + 10.0 * std::sqrt(nbar + 1.0)));
    if (nbar > 0.0) {
        const int tail =
            static_cast<int>(std::ceil(8.0 * std::log(10.0) /
                                       std::log((nbar + 1.0) / nbar)));
        n_max = std::max(n_max, tail);
    }

    std::vector<double> pops(n_max + 1);
    const double ratio = nbar / (nbar + 1.0);
    double p = 1.0 / (nbar + 1.0);
    for (int k = 0; k <= n_max; ++k) {
        pops[k] = p;
        p *= ratio;
    }

    SidebandScan scan;
    scan.times = times;
    scan.red.resize(times.size());
    scan.blue.resize(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        double red = 0.0, blue = 0.0;
        for (int k = 0; k <= n_max; ++k) {
            const double sr =
                std::sin(0.5 * eta * rabi * std::sqrt(double(k)) * times[i]);
            const double sb =
                std::sin(0.5 * eta * rabi * std::sqrt(double(k + 1)) * times[i]);
            red += pops[k] * sr * sr;
            blue += pops[k] * sb * sb;
        }
        scan.red[i] = red;
        scan.blue[i] = blue;
    }
    scan.ratio = extract_sideband_ratio(scan.times, scan.red, scan.blue);
    scan.nbar = scan.ratio < 1.0 ? ratio_to_nbar(scan.ratio) : 0.0;
    return scan;
}

double extract_sideband_ratio(const std::vector<double>& times,
                              const std::vector<double>& red,
                              const std::vector<double>& blue) {
    // early-time window: fit P = a t^2 + b t^4 per sideband and take the
    // quadratic amplitude ratio (robust to Rabi miscalibration)
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < times.size(); ++i)
        if (times[i] > 0.0 && blue[i] < 0.3) idx.push_back(i);
    if (idx.size() < 3)
        for (std::size_t i = idx.size(); i < times.size(); ++i)
            if (times[i] > 0.0) idx.push_back(i);
    if (idx.size() < 2) throw ValidationError("too few early-time samples");

    auto quad_amp = [&](const std::vector<double>& y) {
        double s44 = 0, s46 = 0, s66 = 0, s4y = 0, s6y = 0;
        for (std::size_t i : idx) {
            const double t2 = times[i] * times[i];
            const double t4 = t2 * t2;
            const double t6 = t4 * t2;
            s44 += t4;
            s46 += t6;
            s66 += t6 * t2;
            s4y += t2 * y[i];
            s6y += t4 * y[i];
        }
        const double det = s44 * s66 - s46 * s46;
        return (s66 * s4y - s46 * s6y) / det;
    };
    const double a_blue = quad_amp(blue);
    if (a_blue <= 0.0) throw ValidationError("blue sideband shows no flopping");
    return std::max(quad_amp(red) / a_blue, 0.0);
}

double ratio_to_nbar(double ratio) {
    if (ratio < 0.0 || ratio >= 1.0)
        throw InvalidRatio("sideband ratio must lie in [0, 1)");
    return ratio / (1.0 - ratio);
}

HeatingConversion heating_conversions(double quanta_rate, double omega,
                                      const IonSpecies& species) {
    if (!(omega > 0.0)) throw ValidationError("mode frequency must be positive");
    HeatingConversion c;
    c.temperature_rate =
        quanta_rate * constants::hbar * omega / constants::boltzmann;
    c.field_noise_density = 4.0 * species.mass * constants::hbar * omega *
                            quanta_rate / (species.charge * species.charge);
    return c;
}

double quanta_rate_from_field_noise(double field_noise_density, double omega,
                                    const IonSpecies& species) {
    if (!(omega > 0.0)) throw ValidationError("mode frequency must be positive");
    return species.charge * species.charge * field_noise_density /
           (4.0 * species.mass * constants::hbar * omega);
}

double uncorrelated_mode_scaling(double ncom_rate, double omega_com,
                                 double omega_k) {
    if (!(omega_k > 0.0)) throw ValidationError("mode frequency must be positive");
    return ncom_rate * omega_com / omega_k;
}

} // namespace icsim
