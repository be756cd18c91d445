#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cutl/rng.hpp"
#include "cutl/stats.hpp"
#include "cutl/trajectory.hpp"

// Process specifications and the operations that validate them.
//
// A process is a sampleable one-step law plus a declared moment profile:
// envelopes mu1_lower <= E(Delta | X = x) <= mu1_upper and likewise for
// Delta^2, a jump bound B, and a regime tag. Samplers are stateful objects
// (the norm of a lattice walk needs hidden state), handed the random stream
// explicitly. Distinct replicas use Rng::for_stream(seed, r), so simulation
// is embarrassingly parallel and bit-stable regardless of scheduling; the
// shipped runners simply execute replicas in index order.

namespace cutl {

enum class Regime {
    transient_many_cutpoints,
    critical_window,
    recurrent,
    unclassified,
};

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::transient_many_cutpoints: return "transient-many-cutpoints";
        case Regime::critical_window: return "critical-window";
        case Regime::recurrent: return "recurrent";
        default: return "unclassified";
    }
}

struct MomentProfile {
    std::function<double(double)> mu1_lower, mu1_upper;
    std::function<double(double)> mu2_lower, mu2_upper;
    double jump_bound = 1.0;
    Regime regime_tag = Regime::unclassified;
};

// One atom of a finite one-step law.
struct Atom {
    double y;
    double p;
};

class ScalarStepper {
public:
    virtual ~ScalarStepper() = default;
    virtual void reset(double x0) = 0;
    virtual double position() const = 0;
    virtual double step(Rng& rng) = 0;     // advances and returns new position
};

class ScalarProcess {
public:
    virtual ~ScalarProcess() = default;
    virtual std::string id() const = 0;
    virtual const MomentProfile& profile() const = 0;
    virtual std::unique_ptr<ScalarStepper> make_stepper() const = 0;
    virtual bool in_state_set(double x) const = 0;

    // Finite one-step law from x, for exact drift evaluation. Processes whose
    // law from a scalar position is not finitely enumerable throw.
    virtual std::vector<Atom> support(double x) const = 0;
    virtual bool has_finite_support() const { return true; }
};

class VectorStepper {
public:
    virtual ~VectorStepper() = default;
    virtual void reset(const std::vector<double>& x0) = 0;
    virtual const std::vector<double>& position() const = 0;
    virtual void step(Rng& rng) = 0;
};

class VectorProcess {
public:
    virtual ~VectorProcess() = default;
    virtual std::string id() const = 0;
    virtual std::size_t dim() const = 0;
    // Profile of the radial process ||Xi_n||.
    virtual const MomentProfile& profile() const = 0;
    virtual std::unique_ptr<VectorStepper> make_stepper() const = 0;
    virtual bool in_state_set(const std::vector<double>& x) const = 0;
};

// ---------------------------------------------------------------------------
// simulate

// Memory guard: a path is ~8 bytes per coordinate per step.
inline constexpr std::size_t kMaxStoredSteps = 200'000'000;

inline Trajectory simulate(const ScalarProcess& spec, double x0,
                           std::size_t n_steps, std::uint64_t seed) {
    if (!spec.in_state_set(x0))
        throw std::invalid_argument(spec.id() + ": x0 outside state set");
    if (n_steps > kMaxStoredSteps)
        throw std::invalid_argument("n_steps exceeds the memory budget");
    Trajectory t;
    t.seed = seed;
    t.spec_id = spec.id();
    t.x.reserve(n_steps + 1);
    auto stepper = spec.make_stepper();
    stepper->reset(x0);
    Rng rng(seed);
    t.x.push_back(stepper->position());
    for (std::size_t n = 0; n < n_steps; ++n) t.x.push_back(stepper->step(rng));
    return t;
}

inline VectorTrajectory simulate(const VectorProcess& spec,
                                 const std::vector<double>& x0,
                                 std::size_t n_steps, std::uint64_t seed) {
    if (!spec.in_state_set(x0))
        throw std::invalid_argument(spec.id() + ": x0 outside state set");
    if (n_steps > kMaxStoredSteps / spec.dim())
        throw std::invalid_argument("n_steps exceeds the memory budget");
    VectorTrajectory t;
    t.dim = spec.dim();
    t.seed = seed;
    t.spec_id = spec.id();
    t.flat.reserve((n_steps + 1) * t.dim);
    auto stepper = spec.make_stepper();
    stepper->reset(x0);
    Rng rng(seed);
    auto append = [&t](const std::vector<double>& p) {
        t.flat.insert(t.flat.end(), p.begin(), p.end());
    };
    append(stepper->position());
    for (std::size_t n = 0; n < n_steps; ++n) {
        stepper->step(rng);
        append(stepper->position());
    }
    return t;
}

// ---------------------------------------------------------------------------
// empirical_increment_moments: per-bin sample moments of increments keyed by
// the position the increment originates from.

struct MomentBins {
    struct Row {
        double lo, hi;
        double mean1, mean2;
        std::size_t count;
    };
    std::vector<Row> rows;
};

inline MomentBins empirical_increment_moments(const Trajectory& traj,
                                              const std::vector<double>& edges) {
    if (traj.x.size() < 2)
        throw std::invalid_argument("trajectory has no increments");
    if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()))
        throw std::invalid_argument("bin edges must be sorted, >= 2 of them");
    const std::size_t N = traj.x.size() - 1;
    for (std::size_t n = 0; n < N; ++n)
        if (traj.x[n] < edges.front() || traj.x[n] > edges.back())
            throw std::invalid_argument("bins do not cover the trajectory");

    MomentBins out;
    const std::size_t nbins = edges.size() - 1;
    out.rows.resize(nbins);
    std::vector<double> s1(nbins, 0.0), s2(nbins, 0.0);
    std::vector<std::size_t> cnt(nbins, 0);
    for (std::size_t n = 0; n < N; ++n) {
        const double x = traj.x[n];
        // Bin [e_i, e_{i+1}); the final bin is closed so counts sum to N.
        std::size_t i = static_cast<std::size_t>(
            std::upper_bound(edges.begin(), edges.end(), x) - edges.begin());
        i = i == 0 ? 0 : i - 1;
        if (i >= nbins) i = nbins - 1;
        const double d = traj.x[n + 1] - traj.x[n];
        s1[i] += d;
        s2[i] += d * d;
        ++cnt[i];
    }
    for (std::size_t i = 0; i < nbins; ++i) {
        auto& row = out.rows[i];
        row.lo = edges[i];
        row.hi = edges[i + 1];
        row.count = cnt[i];
        row.mean1 = cnt[i] ? s1[i] / static_cast<double>(cnt[i]) : 0.0;
        row.mean2 = cnt[i] ? s2[i] / static_cast<double>(cnt[i]) : 0.0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// verify_ellipticity: largest grid value eps in {B/2^j : j >= 1} such that
// the one-sided 99% lower confidence bound on P(Delta >= eps) is >= eps at
// every tested x. Empty optional if even the smallest grid value fails.

struct EllipticityReport {
    std::optional<double> epsilon;
    struct Row {
        double x;
        double p_hat;        // empirical P(Delta >= eps) at the reported eps
        double lower99;
    };
    std::vector<Row> table;
};

inline EllipticityReport verify_ellipticity(const ScalarProcess& spec,
                                            const std::vector<double>& xs,
                                            std::size_t samples,
                                            std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("need samples >= 1");
    if (xs.empty()) throw std::invalid_argument("need at least one test x");
    const double B = spec.profile().jump_bound;

    // One increment batch per x, sorted descending so every grid eps reuses it.
    std::vector<std::vector<double>> batches;
    auto stepper = spec.make_stepper();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        Rng rng = Rng::for_stream(seed, i);
        std::vector<double> deltas(samples);
        for (std::size_t s = 0; s < samples; ++s) {
            stepper->reset(xs[i]);
            deltas[s] = stepper->step(rng) - xs[i];
        }
        std::sort(deltas.begin(), deltas.end(), std::greater<double>());
        batches.push_back(std::move(deltas));
    }

    auto passes = [&](double eps, std::vector<EllipticityReport::Row>* rows) {
        bool ok = true;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const auto& d = batches[i];
            // d is descending: count of entries >= eps.
            const auto it = std::lower_bound(d.begin(), d.end(), eps,
                                             std::greater<double>());
            const double p_hat =
                static_cast<double>(it - d.begin()) / static_cast<double>(samples);
            const double lower = stats::wilson_lower(
                p_hat, static_cast<double>(samples), stats::kZ99);
            if (rows) rows->push_back({xs[i], p_hat, lower});
            if (lower < eps) ok = false;
        }
        return ok;
    };

    EllipticityReport report;
    double eps = B / 2.0;
    for (int j = 1; j <= 60; ++j, eps /= 2.0) {
        if (passes(eps, nullptr)) {
            report.epsilon = eps;
            passes(eps, &report.table);
            return report;
        }
    }
    passes(B / 2.0, &report.table);   // "no eps found": table at the top value
    return report;
}

// ---------------------------------------------------------------------------
// classify: regime tag from a MomentProfile alone.
//
// The asymptotic conditions are evaluated at two far-out points x1 < x2 with
// a ratio test separating genuine limits from 1/log-decay:
//   drift surplus  D(x) = 2x*mu1(x) - mu2(x)      (bracketed via the bounds)
//   surplus_positive:  liminf D > 0, via pessimistic D positive with a
//                      stable ratio between the two probe points
//   drift_bounded:     limsup x*mu1 < inf, via optimistic x*mu1 staying
//                      bounded between x1 and x2
//   surplus_log_small: mu1 >= 0 and D <= const/log x, via optimistic
//                      D*log x bounded
//   surplus_beats_mu2: D*log x >= (1+theta)*mu2 for some theta > 0, via
//                      pessimistic c-hat above optimistic b-hat
// In the vanishing-surplus window the refinement compares
//   c-hat = lim D(x)*log x   against   b-hat = lim mu2(x):
// c-hat > b-hat certifies transience (critical window), c-hat < b-hat
// certifies recurrence. Certification needs the profile's mu1 envelope to be
// o(1/(x log x))-tight, which shows up as a converged c-hat bracket; profiles
// with honest wider slack (the elliptic boundary case) abstain.

struct ClassifyResult {
    Regime tag = Regime::unclassified;
    bool surplus_positive = false, drift_bounded = false, surplus_log_small = false, surplus_beats_mu2 = false;
    double chat_lo = 0.0, chat_hi = 0.0;
    double bhat_lo = 0.0, bhat_hi = 0.0;
};

inline ClassifyResult classify(const MomentProfile& prof) {
    constexpr double x1 = 1e8, x2 = 1e16;
    const double l1 = std::log(x1), l2 = std::log(x2);

    auto d_lo = [&](double x) { return 2.0 * x * prof.mu1_lower(x) - prof.mu2_upper(x); };
    auto d_hi = [&](double x) { return 2.0 * x * prof.mu1_upper(x) - prof.mu2_lower(x); };

    ClassifyResult res;
    res.bhat_lo = prof.mu2_lower(x2);
    res.bhat_hi = prof.mu2_upper(x2);
    res.chat_lo = d_lo(x2) * l2;
    res.chat_hi = d_hi(x2) * l2;

    const double dlo1 = d_lo(x1), dlo2 = d_lo(x2);
    const double dhi1 = d_hi(x1), dhi2 = d_hi(x2);

    res.surplus_positive = dlo1 > 0 && dlo2 > 0 && dlo2 >= 0.6 * dlo1;
    const double xm1 = x1 * prof.mu1_upper(x1), xm2 = x2 * prof.mu1_upper(x2);
    res.drift_bounded = xm2 <= 1.5 * std::max(std::abs(xm1), 1.0) + 1.0;
    const double g1 = dhi1 * l1, g2 = dhi2 * l2;
    res.surplus_log_small = prof.mu1_lower(x2) >= -1e-12 &&
                  g2 <= 1.8 * std::max(g1, 0.0) + 0.1;
    res.surplus_beats_mu2 = res.chat_lo > res.bhat_hi;

    if (res.surplus_positive && res.drift_bounded) {
        res.tag = Regime::transient_many_cutpoints;
        return res;
    }
    if (dhi1 < 0 && dhi2 < 0 && dhi2 <= 0.6 * dhi1) {
        res.tag = Regime::recurrent;
        return res;
    }
    const double tol = 0.1 * std::max(res.bhat_lo, 0.0) + 0.1;
    const bool converged = std::abs(d_lo(x2) * l2 - d_lo(x1) * l1) <= tol &&
                           std::abs(d_hi(x2) * l2 - d_hi(x1) * l1) <= tol;
    if (converged) {
        const double margin = 0.05 * std::max(res.bhat_hi, 1.0);
        if (res.surplus_log_small && res.chat_lo > res.bhat_hi + margin) {
            res.tag = Regime::critical_window;
            return res;
        }
        if (res.chat_hi < res.bhat_lo - margin) {
            res.tag = Regime::recurrent;
            return res;
        }
    }
    return res;
}

} // namespace cutl
