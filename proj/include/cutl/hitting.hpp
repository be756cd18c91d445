#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cutl/generators.hpp"
#include "cutl/process.hpp"
#include "cutl/stats.hpp"
#include "cutl/trajectory.hpp"

// Stopping times tau (first passage down to a level) and eta (first strict
// exceedance), Monte Carlo race estimators between an upper and a lower
// barrier, and exact birth-death oracles for cross-checking them.
//
// Barrier convention for the races: a replica escapes when its position
// reaches x + y (>= comparison, so starting exactly on the barrier escapes
// immediately) and returns when it reaches x (<= comparison). On integer
// chains with unit up-steps these coincide with the strict stopping times.

namespace cutl {

struct FirstPassage {
    std::optional<std::size_t> tau;   // first m >= n with X_m <= x
    std::optional<std::size_t> eta;   // first m >= n with X_m >  x
};

inline FirstPassage first_passage(const Trajectory& traj, std::size_t n,
                                  double x) {
    if (traj.x.empty() || n > traj.horizon())
        throw std::invalid_argument("first_passage: start beyond horizon");
    FirstPassage fp;
    for (std::size_t m = n; m < traj.x.size(); ++m) {
        if (!fp.tau && traj.x[m] <= x) fp.tau = m;
        if (!fp.eta && traj.x[m] > x) fp.eta = m;
        if (fp.tau && fp.eta) break;
    }
    return fp;
}

struct StoppingConfig {
    double x = 0.0;                 // return level
    double y = 0.0;                 // escape barrier sits at x + y
    double start = 0.0;
    std::size_t replicas = 10'000;
    std::uint64_t max_steps = 0;    // 0 -> generous automatic cap
    std::uint64_t seed = 1;
};

struct EscapeEstimate {
    double p_hat = 0.0;
    double half_width = 0.0;        // 95% binomial interval half-width
    std::size_t escapes = 0, returns = 0, truncations = 0;
    double bias_scale = 0.0;        // infinity-surrogate only; see below

    std::size_t replicas() const { return escapes + returns + truncations; }

    // Standard error for k-sigma comparisons: Wald, floored by the interval
    // half-width so degenerate counts (0 or R escapes) still give a usable
    // scale.
    double se() const {
        const double n = static_cast<double>(replicas());
        if (n == 0.0) return 0.0;
        return std::max(std::sqrt(p_hat * (1.0 - p_hat) / n),
                        half_width / stats::kZ95);
    }
};

namespace detail {

// Interval choice documented with the estimator: Wald at comfortable counts,
// Wilson once either count drops below 5 (Wald's width collapses there).
inline void finish_estimate(EscapeEstimate& est) {
    const double n = static_cast<double>(est.replicas());
    const double k = static_cast<double>(est.escapes);
    est.p_hat = n > 0.0 ? k / n : 0.0;
    if (n == 0.0) return;
    const bool small = est.escapes < 5 || est.replicas() - est.escapes < 5;
    const auto iv = small ? stats::wilson(k, n, stats::kZ95)
                          : stats::wald(k, n, stats::kZ95);
    est.half_width = (iv.hi - iv.lo) / 2.0;
}

inline std::uint64_t default_race_cap(double x, double y) {
    const double range = x + y;
    const double cap = 50.0 * range * range + 1e6;
    return cap > 9e18 ? std::uint64_t{9'000'000'000'000'000'000ull}
                      : static_cast<std::uint64_t>(cap);
}

// Shared race loop. With `targeted` set, an escape only counts when the
// landing position is exactly the barrier; replicas that win the race with
// an overshoot are folded into `returns` (they decided the race but missed
// the event).
inline EscapeEstimate run_race(const ScalarProcess& spec,
                               const StoppingConfig& cfg, bool targeted) {
    if (!(cfg.x < cfg.start && cfg.start <= cfg.x + cfg.y))
        throw std::invalid_argument("race needs x < start <= x + y");
    if (cfg.replicas < 1) throw std::invalid_argument("race needs replicas >= 1");
    if (!spec.in_state_set(cfg.start))
        throw std::invalid_argument(spec.id() + ": start outside state set");
    const double esc = cfg.x + cfg.y;
    const std::uint64_t cap =
        cfg.max_steps ? cfg.max_steps : default_race_cap(cfg.x, cfg.y);
    EscapeEstimate est;
    auto stepper = spec.make_stepper();
    for (std::size_t r = 0; r < cfg.replicas; ++r) {
        Rng rng = Rng::for_stream(cfg.seed, r);
        stepper->reset(cfg.start);
        double pos = cfg.start;
        std::uint64_t steps = 0;
        for (;;) {
            if (pos >= esc) {
                if (!targeted || std::abs(pos - esc) <= 1e-9)
                    ++est.escapes;
                else
                    ++est.returns;
                break;
            }
            if (pos <= cfg.x) {
                ++est.returns;
                break;
            }
            if (steps == cap) {
                ++est.truncations;
                break;
            }
            pos = stepper->step(rng);
            ++steps;
        }
    }
    finish_estimate(est);
    return est;
}

} // namespace detail

// P(reach x + y before x | X_0 = start), estimated over independent replicas.
inline EscapeEstimate mc_race(const ScalarProcess& spec,
                              const StoppingConfig& cfg) {
    return detail::run_race(spec, cfg, false);
}

inline EscapeEstimate mc_race(const ScalarProcess& spec, double start, double x,
                              double y, std::size_t replicas,
                              std::uint64_t seed) {
    StoppingConfig cfg;
    cfg.x = x;
    cfg.y = y;
    cfg.start = start;
    cfg.replicas = replicas;
    cfg.seed = seed;
    return mc_race(spec, cfg);
}

// Surrogate for P(tau_x = infinity): the race to the far barrier
// x + y_cap_mult*x. Escaping replicas may still return from above the far
// barrier; that deficit is at most p_hat times a constant times
// (x + y*)/(x y*) by the race upper bound at the far level, so bias_scale
// reports p_hat*(x + y*)/(x*y*) for the caller to scale by the fitted
// constant.
inline EscapeEstimate mc_escape_forever(const ScalarProcess& spec, double start,
                                        double x, double y_cap_mult,
                                        std::size_t replicas,
                                        std::uint64_t seed) {
    if (!(y_cap_mult > 0.0) || !(x > 0.0))
        throw std::invalid_argument("mc_escape_forever: need x > 0 and y_cap_mult > 0");
    const double ystar = y_cap_mult * x;
    EscapeEstimate est = mc_race(spec, start, x, ystar, replicas, seed);
    est.bias_scale = est.p_hat * (x + ystar) / (x * ystar);
    return est;
}

// P(win the race AND land exactly on x + y). Equals mc_race for
// nearest-neighbour chains, where overshoot is impossible.
inline EscapeEstimate targeted_entry_probability(const ScalarProcess& spec,
                                                 double start, double x,
                                                 double y, std::size_t replicas,
                                                 std::uint64_t seed) {
    StoppingConfig cfg;
    cfg.x = x;
    cfg.y = y;
    cfg.start = start;
    cfg.replicas = replicas;
    cfg.seed = seed;
    return detail::run_race(spec, cfg, true);
}

// ---------------------------------------------------------------------------
// Exact birth-death oracles.

namespace detail {

// Online log-sum-exp accumulator.
struct LogSum {
    double m = -std::numeric_limits<double>::infinity();
    double s = 0.0;
    void add(double t) {
        if (t <= m) {
            s += std::exp(t - m);
        } else {
            s = s * std::exp(m - t) + 1.0;
            m = t;
        }
    }
    double value() const { return m + std::log(s); }
};

inline long long checked_level(double v, const char* what) {
    if (!std::isfinite(v) || std::abs(v - std::round(v)) > 1e-9)
        throw std::invalid_argument(std::string("bd oracle: ") + what +
                                    " must be an integer");
    return static_cast<long long>(std::llround(v));
}

} // namespace detail

// Gambler's-ruin probability for a nearest-neighbour chain with up-step
// probability up_prob(i): P_start(hit b before a), via the scale-function
// series with log-sum accumulation:
//   [ sum_{k=a}^{start-1} prod_{i=a+1}^{k} rho_i ] /
//   [ sum_{k=a}^{b-1}     prod_{i=a+1}^{k} rho_i ],  rho_i = (1-p_i)/p_i.
inline double bd_exact_race(const std::function<double(double)>& up_prob,
                            double start, double a, double b) {
    const long long ia = detail::checked_level(a, "a");
    const long long is = detail::checked_level(start, "start");
    const long long ib = detail::checked_level(b, "b");
    if (!(ia < is && is < ib))
        throw std::invalid_argument("bd_exact_race: need a < start < b");
    detail::LogSum num, den;
    double logprod = 0.0;
    for (long long k = ia; k < ib; ++k) {
        if (k > ia) {
            const double p = up_prob(static_cast<double>(k));
            if (!(p > 0.0 && p < 1.0))
                throw std::invalid_argument(
                    "bd_exact_race: interior up-probability must lie in (0,1)");
            logprod += std::log((1.0 - p) / p);
        }
        den.add(logprod);
        if (k < is) num.add(logprod);
    }
    return std::exp(num.value() - den.value());
}

inline double bd_exact_race(const BdLamperti& spec, double start, double a,
                            double b) {
    return bd_exact_race([&spec](double x) { return spec.up_prob(x); }, start,
                         a, b);
}

// P_start(never reach a) for a transient nearest-neighbour chain: the b -> oo
// limit of bd_exact_race. Terms (scale-function products) decay like
// k^(-ahat) with ahat typically near 2, so summing them outright to a useful
// tolerance would take ~1/tol terms. Instead the sum runs until the tail can
// be extrapolated safely, then the tail is added in closed form: a power law
// with exponent ahat read off the local step ratio, with Euler-Maclaurin
// endpoint corrections. tail_fraction reports the estimated relative error
// left after that correction -- the power law's measured drift over the last
// octave, doubled for the octaves not seen, plus a curvature floor -- so the
// result is an oracle for clearly transient chains, not a general summer.
struct SeriesEstimate {
    double value = 0.0;
    double tail_fraction = 0.0;     // estimated residual error, relative
};

inline SeriesEstimate bd_never_return_series(
    const std::function<double(double)>& up_prob, double start, double a,
    double rel_tol = 1e-10, std::size_t max_terms = 100'000'000) {
    const long long ia = detail::checked_level(a, "a");
    const long long is = detail::checked_level(start, "start");
    if (!(ia < is))
        throw std::invalid_argument("bd_never_return_series: need a < start");
    detail::LogSum num, den;
    double logprod = 0.0, last_ratio = 0.0;
    // Extrapolation-drift gauge: the log-term and local exponent one octave
    // back, so the power-law model can be scored on the stretch it just ran.
    long long anchor_k = 0, next_check = std::max(is, ia + 64) + 1;
    double anchor_logprod = 0.0, anchor_ahat = 0.0;
    for (long long k = ia;; ++k) {
        if (k > ia) {
            const double p = up_prob(static_cast<double>(k));
            if (!(p > 0.0 && p < 1.0))
                throw std::invalid_argument(
                    "bd_never_return_series: up-probability must lie in (0,1)");
            last_ratio = (1.0 - p) / p;
            logprod += std::log(last_ratio);
        }
        den.add(logprod);
        if (k < is) num.add(logprod);
        if (static_cast<std::size_t>(k - ia) >= max_terms)
            throw std::runtime_error(
                "bd_never_return_series: truncation budget exhausted");
        if (k >= next_check) {
            const double kd = static_cast<double>(k);
            const double ahat = kd * (1.0 - last_ratio);
            if (ahat > 1.05 && anchor_ahat > 1.05) {
                // Tail of the model sum_{j>k} (k/j)^ahat, Euler-Maclaurin
                // through the second endpoint correction.
                const double u = kd + 1.0;
                const double log_tail =
                    logprod + ahat * std::log(kd) + (1.0 - ahat) * std::log(u) +
                    std::log(1.0 / (ahat - 1.0) + 0.5 / u +
                             ahat / (12.0 * u * u));
                // Score the model on the octave behind us; ahead of us the
                // drift shrinks geometrically, hence the factor two. The
                // floor covers what the gauge cannot see: exponent curvature
                // inside the extrapolated tail and the Euler-Maclaurin cut.
                const double pred = anchor_logprod -
                                    anchor_ahat * std::log(kd / anchor_k);
                const double drift = std::abs(std::expm1(pred - logprod));
                const double floor = 4.0 * (1.0 + ahat) * (1.0 + ahat) / kd;
                const double residual =
                    std::exp(log_tail - den.value()) * (2.0 * drift + floor);
                if (residual < rel_tol) {
                    den.add(log_tail);
                    SeriesEstimate out;
                    out.tail_fraction = residual;
                    out.value = std::exp(num.value() - den.value());
                    return out;
                }
            }
            anchor_k = k;
            anchor_logprod = logprod;
            anchor_ahat = ahat;
            next_check = 2 * k;
        }
    }
}

inline SeriesEstimate bd_never_return_series(const BdLamperti& spec,
                                             double start, double a,
                                             double rel_tol = 1e-10) {
    return bd_never_return_series(
        [&spec](double x) { return spec.up_prob(x); }, start, a, rel_tol);
}

// ---------------------------------------------------------------------------

struct EscapeRow {
    double x, y;
    EscapeEstimate est;
};

inline void write_escape_csv(const std::vector<EscapeRow>& rows,
                             const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "x,y,estimate,ci,escapes,returns,truncations\n";
    for (const auto& r : rows)
        out << detail::fmt_double(r.x) << ',' << detail::fmt_double(r.y) << ','
            << detail::fmt_double(r.est.p_hat) << ','
            << detail::fmt_double(r.est.half_width) << ',' << r.est.escapes
            << ',' << r.est.returns << ',' << r.est.truncations << '\n';
}

} // namespace cutl
