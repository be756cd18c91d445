#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cutl/process.hpp"

// Lyapunov test functions x^-gamma and log^-nu x, their exact one-step
// drifts under a finite-support kernel, and the second-order drift
// predictions driven by a moment profile. The predictions carry an explicit
// error scale; accuracy tests inflate the predicted interval by that scale
// times a fitted constant rather than pretending the expansion is exact.

namespace cutl {

inline constexpr double kEulerE = 2.718281828459045235;

inline double f_gamma(double x, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("f_gamma: need gamma > 0");
    return x >= 1.0 ? std::pow(x, -gamma) : 1.0;
}

inline double g_nu(double x, double nu) {
    if (!(nu > 0.0)) throw std::invalid_argument("g_nu: need nu > 0");
    return x >= kEulerE ? std::pow(std::log(x), -nu) : 1.0;
}

struct LyapunovParams {
    enum class Kind { power, log_power };   // f_gamma resp. g_nu
    Kind kind = Kind::power;
    double exponent = 1.0;                  // gamma or nu, > 0
    double y2 = 0.0;                        // fitted validity threshold

    static LyapunovParams f(double gamma, double y2 = 0.0) {
        return {Kind::power, gamma, y2};
    }
    static LyapunovParams g(double nu, double y2 = 0.0) {
        return {Kind::log_power, nu, y2};
    }
};

inline double lyapunov_value(const LyapunovParams& fn, double x) {
    return fn.kind == LyapunovParams::Kind::power ? f_gamma(x, fn.exponent)
                                                  : g_nu(x, fn.exponent);
}

// Sum_y P(x -> y) fn(y) - fn(x), exact up to floating point.
inline double exact_one_step_drift(const ScalarProcess& spec,
                                   const LyapunovParams& fn, double x) {
    if (!spec.has_finite_support())
        throw std::invalid_argument(spec.id() +
                                    ": one-step law lacks finite support");
    double acc = 0.0;
    for (const Atom& a : spec.support(x)) acc += a.p * lyapunov_value(fn, a.y);
    return acc - lyapunov_value(fn, x);
}

// Second-order drift prediction from the moment envelopes:
//   power:     -(gamma/2) [2x mu1 - (1+gamma) mu2] x^(-gamma-2),
//              error scale x^(-gamma-2);
//   log_power: -(nu/2) [2x mu1 - mu2] x^-2 log^(-nu-1) x
//              + nu(nu+1) mu2 x^-2 log^(-nu-2) x,
//              error scale x^-2 log^(-nu-2) x.
// The interval brackets the expression over the profile's mu bounds.
struct DriftPrediction {
    double lo = 0.0, hi = 0.0;
    double o_scale = 0.0;
};

inline DriftPrediction predicted_drift(const MomentProfile& prof,
                                       const LyapunovParams& fn, double x) {
    const double m1l = prof.mu1_lower(x), m1u = prof.mu1_upper(x);
    const double m2l = prof.mu2_lower(x), m2u = prof.mu2_upper(x);
    DriftPrediction out;
    if (fn.kind == LyapunovParams::Kind::power) {
        if (!(x >= 1.0))
            throw std::invalid_argument("predicted_drift: need x >= 1");
        const double g = fn.exponent;
        const double pref = -(g / 2.0) * std::pow(x, -g - 2.0);
        const double blo = 2.0 * x * m1l - (1.0 + g) * m2u;
        const double bhi = 2.0 * x * m1u - (1.0 + g) * m2l;
        out.lo = pref * bhi;                 // pref < 0 flips the order
        out.hi = pref * blo;
        out.o_scale = std::pow(x, -g - 2.0);
        return out;
    }
    if (!(x >= kEulerE))
        throw std::invalid_argument("predicted_drift: need x >= e");
    const double v = fn.exponent;
    const double L = std::log(x);
    const double pref1 = -(v / 2.0) / (x * x) * std::pow(L, -v - 1.0);
    const double c2 = v * (v + 1.0) / (x * x) * std::pow(L, -v - 2.0);
    out.lo = pref1 * (2.0 * x * m1u - m2l) + c2 * m2l;
    out.hi = pref1 * (2.0 * x * m1l - m2u) + c2 * m2u;
    out.o_scale = std::pow(L, -v - 2.0) / (x * x);
    return out;
}

// Smallest grid point from which the exact drift keeps the requested sign
// through the rest of the grid; empty if the sign fails at the top.
inline std::optional<double> fit_sign_threshold(const ScalarProcess& spec,
                                                const LyapunovParams& fn,
                                                bool nonnegative,
                                                const std::vector<double>& grid) {
    std::optional<double> best;
    for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
        const double d = exact_one_step_drift(spec, fn, *it);
        if (nonnegative ? d >= 0.0 : d <= 0.0)
            best = *it;
        else
            break;
    }
    return best;
}

struct DriftSweepRow {
    double x, param, exact, pred_lo, pred_hi;
};

inline void write_drift_sweep_csv(const std::vector<DriftSweepRow>& rows,
                                  const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "x,param,exact,pred_lo,pred_hi\n";
    for (const auto& r : rows)
        out << detail::fmt_double(r.x) << ',' << detail::fmt_double(r.param)
            << ',' << detail::fmt_double(r.exact) << ','
            << detail::fmt_double(r.pred_lo) << ','
            << detail::fmt_double(r.pred_hi) << '\n';
}

} // namespace cutl
