#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

// Small numeric toolbox: sample moments, (weighted) least squares on a
// transformed abscissa, and binomial confidence intervals. Everything here
// is closed-form; fixed normal quantiles are baked in so thresholds used by
// tests are unambiguous.

namespace cutl::stats {

inline constexpr double kZ95 = 1.959963984540054;        // two-sided 95%
inline constexpr double kZ99 = 2.3263478740408408;       // one-sided 99%
inline constexpr double kZ95OneSided = 1.6448536269514722;

inline double mean(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean of empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
    if (v.size() < 2) throw std::invalid_argument("variance needs >= 2 points");
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

struct LinFit {
    double slope = 0.0, intercept = 0.0;
    double r2 = 0.0;
    double slope_se = 0.0;
    double slope_ci95() const { return kZ95 * slope_se; }
    double trend_z() const { return slope_se > 0.0 ? slope / slope_se : 0.0; }
};

// Least squares y ~ slope*u + intercept, optionally weighted. slope_se uses
// the residual variance with n-2 degrees of freedom (0 when the fit is
// exact or n == 2).
inline LinFit linear_fit(const std::vector<double>& u,
                         const std::vector<double>& y,
                         const std::vector<double>* w = nullptr) {
    const std::size_t n = u.size();
    if (n != y.size() || (w && w->size() != n))
        throw std::invalid_argument("linear_fit: mismatched lengths");
    if (n < 2) throw std::invalid_argument("linear_fit: need >= 2 points");
    double sw = 0.0, su = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w ? (*w)[i] : 1.0;
        if (!(wi > 0.0)) throw std::invalid_argument("linear_fit: weights must be > 0");
        sw += wi;
        su += wi * u[i];
        sy += wi * y[i];
    }
    const double ubar = su / sw, ybar = sy / sw;
    double suu = 0.0, suy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w ? (*w)[i] : 1.0;
        suu += wi * (u[i] - ubar) * (u[i] - ubar);
        suy += wi * (u[i] - ubar) * (y[i] - ybar);
        syy += wi * (y[i] - ybar) * (y[i] - ybar);
    }
    if (!(suu > 0.0)) throw std::invalid_argument("linear_fit: degenerate abscissa");
    LinFit fit;
    fit.slope = suy / suu;
    fit.intercept = ybar - fit.slope * ubar;
    double ssres = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w ? (*w)[i] : 1.0;
        const double r = y[i] - fit.intercept - fit.slope * u[i];
        ssres += wi * r * r;
    }
    fit.r2 = syy > 0.0 ? 1.0 - ssres / syy : 1.0;
    if (n > 2 && ssres > 0.0)
        fit.slope_se = std::sqrt(ssres / static_cast<double>(n - 2) / suu);
    return fit;
}

enum class GrowthModel { log_x, log_log_x, inv_log_sq_x };

inline const char* to_string(GrowthModel m) {
    switch (m) {
        case GrowthModel::log_x: return "log_x";
        case GrowthModel::log_log_x: return "log_log_x";
        default: return "inv_log_sq_x";
    }
}

// Fit y against a transformed abscissa: log x, log log x, or 1/log^2 x.
inline LinFit fit_log_growth(const std::vector<double>& xs,
                             const std::vector<double>& ys, GrowthModel m,
                             const std::vector<double>* w = nullptr) {
    std::vector<double> u(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = xs[i];
        switch (m) {
            case GrowthModel::log_x:
                if (!(x > 0)) throw std::invalid_argument("fit_log_growth: need x > 0");
                u[i] = std::log(x);
                break;
            case GrowthModel::log_log_x:
                if (!(x > 1)) throw std::invalid_argument("fit_log_growth: need x > 1");
                u[i] = std::log(std::log(x));
                break;
            case GrowthModel::inv_log_sq_x: {
                if (!(x > 1)) throw std::invalid_argument("fit_log_growth: need x > 1");
                const double L = std::log(x);
                u[i] = 1.0 / (L * L);
                break;
            }
        }
    }
    return linear_fit(u, ys, w);
}

struct BinomInterval {
    double lo = 0.0, hi = 1.0;
};

inline BinomInterval wilson(double successes, double n, double z) {
    if (!(n > 0)) throw std::invalid_argument("wilson: need n > 0");
    const double p = successes / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = p + z2 / (2.0 * n);
    const double rad = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return {std::max(0.0, (center - rad) / denom),
            std::min(1.0, (center + rad) / denom)};
}

inline double wilson_lower(double p_hat, double n, double z) {
    return wilson(p_hat * n, n, z).lo;
}

inline BinomInterval wald(double successes, double n, double z) {
    if (!(n > 0)) throw std::invalid_argument("wald: need n > 0");
    const double p = successes / n;
    const double hw = z * std::sqrt(p * (1.0 - p) / n);
    return {p - hw, p + hw};
}

} // namespace cutl::stats
