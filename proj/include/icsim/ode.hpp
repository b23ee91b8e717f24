#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "icsim/errors.hpp"

namespace icsim {

struct OdeOptions {
    double rtol = 1e-12;
    double atol = 1e-14;
    double initial_step = 0.0; // 0: span / 100
    long max_steps = 50'000'000;
};

// Dormand-Prince 5(4) with PI step control. rhs(t, y, dydt) fills dydt.
template <class Rhs>
Eigen::VectorXd integrate_dopri5(Rhs&& rhs, Eigen::VectorXd y, double t0,
                                 double t1, const OdeOptions& opt = {}) {
    if (t1 == t0) return y;
    const double span = t1 - t0;
    const int n = static_cast<int>(y.size());

    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
    Eigen::VectorXd ytmp(n), y5(n), err(n);

    double t = t0;
    double h = opt.initial_step != 0.0 ? opt.initial_step : span / 100.0;
    rhs(t, y, k1); // FSAL seed

    long steps = 0;
    while ((span > 0 && t < t1) || (span < 0 && t > t1)) {
        if (++steps > opt.max_steps)
            throw NotConverged("ODE step budget exhausted");
        if ((span > 0 && t + h > t1) || (span < 0 && t + h < t1)) h = t1 - t;

        ytmp = y + h * (1.0 / 5.0) * k1;
        rhs(t + h / 5.0, ytmp, k2);
        ytmp = y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2);
        rhs(t + 3.0 * h / 10.0, ytmp, k3);
        ytmp = y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3);
        rhs(t + 4.0 * h / 5.0, ytmp, k4);
        ytmp = y + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 +
                        64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4);
        rhs(t + 8.0 * h / 9.0, ytmp, k5);
        ytmp = y + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 +
                        46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4 -
                        5103.0 / 18656.0 * k5);
        rhs(t + h, ytmp, k6);
        y5 = y + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 +
                      125.0 / 192.0 * k4 - 2187.0 / 6784.0 * k5 +
                      11.0 / 84.0 * k6);
        rhs(t + h, y5, k7);

        err = h * ((35.0 / 384.0 - 5179.0 / 57600.0) * k1 +
                   (500.0 / 1113.0 - 7571.0 / 16695.0) * k3 +
                   (125.0 / 192.0 - 393.0 / 640.0) * k4 +
                   (-2187.0 / 6784.0 + 92097.0 / 339200.0) * k5 +
                   (11.0 / 84.0 - 187.0 / 2100.0) * k6 - (1.0 / 40.0) * k7);

        double norm2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double scale =
                opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
            const double e = err[i] / scale;
            norm2 += e * e;
        }
        const double enorm = std::sqrt(norm2 / n);

        if (enorm <= 1.0) {
            t += h;
            y.swap(y5);
            k1.swap(k7); // FSAL
        }
        const double factor =
            std::clamp(0.9 * std::pow(std::max(enorm, 1e-10), -0.2), 0.2, 5.0);
        h *= factor;
    }
    return y;
}

} // namespace icsim
