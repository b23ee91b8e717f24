#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace icsim {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double r_squared = 0.0;
};

inline LinearFit fit_line(const std::vector<double>& x,
                          const std::vector<double>& y) {
    const std::size_t n = x.size();
    LinearFit fit;
    if (n < 2) return fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;

    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += r * r;
    }
    const double ss_tot = syy - sy * sy / n;
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    if (n > 2)
        fit.slope_stderr = std::sqrt(ss_res / (n - 2) * n / denom);
    return fit;
}

} // namespace icsim
