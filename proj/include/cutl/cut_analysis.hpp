#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cutl/trajectory.hpp"

// Exact O(N)/O(N log N) detectors for cut structure at a finite horizon.
//
// The definitions quantify over an infinite future; at horizon N each
// detected structure carries a confirmation status instead:
//   CONFIRMED — the defining clauses hold for all n <= N *and* the path has
//               escaped at least W above the structure, so a later violation
//               would require a return from x+W down to x;
//   CANDIDATE — the clauses hold up to N only.
// Counting experiments treat CONFIRMED as an undercount and CANDIDATE as an
// overcount and report both.

namespace cutl {

enum class Status { candidate, confirmed };

inline const char* to_string(Status s) {
    return s == Status::confirmed ? "CONFIRMED" : "CANDIDATE";
}

struct CutPoint {
    double x;
    std::size_t n0;
    bool strong;
    Status status;
};

struct CutTimePoint {
    std::size_t n;
    Status status;
};

struct CutInterval {
    double l, r;
    std::size_t k_obs;                   // path points strictly inside (l, r)
    std::vector<double> interior;        // those points (strong cutpoints)
    Status status;
};

struct CutAnnulus {
    double l, r;
    std::size_t entry;                   // first time the norm enters (l, r)
    std::size_t inside;                  // interior visits (>= k)
    Status status;
};

// Open-interval union representation of the separating set. Intervals are
// disjoint and sorted; intervals that merely touch at an endpoint stay
// separate because the shared endpoint itself is not separating. The single
// point 0 is the one endpoint that can be separating (a strip reaching below
// zero gets clipped to [0, ...)), so membership of 0 rides in its own flag.
struct SeparatingSet {
    struct Interval {
        double lo, hi;                   // open (lo, hi); hi may be +infinity
    };
    std::vector<Interval> intervals;
    bool includes_zero = false;          // 0 ∈ S before the [0, ∞) clip
    double candidate_measure = 0.0;      // |S ∩ [0, max X]|
    double confirmed_measure = 0.0;      // |S ∩ [0, max X - W]|
    double path_max = 0.0;
    double window = 0.0;

    bool contains(double x) const {
        if (x == 0.0) return includes_zero;
        for (const auto& iv : intervals)
            if (iv.lo < x && x < iv.hi) return true;
        return false;
    }

    // |S ∩ [lo, hi]| — the M_x statistic takes [x/2, 2x].
    double measure_in(double lo, double hi) const {
        double total = 0.0;
        for (const auto& iv : intervals) {
            const double a = std::max(iv.lo, lo);
            const double b = std::min(iv.hi, hi);
            if (b > a) total += b - a;
        }
        return total;
    }

    double sup() const {
        double s = 0.0;
        for (const auto& iv : intervals) s = std::max(s, iv.hi);
        return s;
    }
};

struct CutReport {
    std::vector<CutPoint> cutpoints;         // C; strong flag marks Cs
    SeparatingSet separating;                // S
    std::vector<CutTimePoint> cut_times;     // T
    std::size_t horizon = 0;
    double window = 0.0;

    std::size_t strong_count() const {
        std::size_t c = 0;
        for (const auto& p : cutpoints) c += p.strong ? 1 : 0;
        return c;
    }
};

namespace detail {

inline std::vector<double> prefix_max(const std::vector<double>& x) {
    std::vector<double> pm(x.size());
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < x.size(); ++n) pm[n] = m = std::max(m, x[n]);
    return pm;
}

inline std::vector<double> suffix_min(const std::vector<double>& x) {
    std::vector<double> sm(x.size());
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t n = x.size(); n-- > 0;) sm[n] = m = std::min(m, x[n]);
    return sm;
}

} // namespace detail

// x at time n0 is a cutpoint iff X_n <= x for all n <= n0, X_{n0} = x, and
// X_n > x for n0 < n <= N; strong additionally needs X_n < x for n < n0.
// Equivalent O(N) form: X_{n0} equals the running maximum and the suffix
// minimum after n0 exceeds it (strict previous-maximum for strong).
inline std::vector<CutPoint> detect_cutpoints(const Trajectory& traj, double W) {
    if (W < 0) throw std::invalid_argument("confirmation window must be >= 0");
    std::vector<CutPoint> out;
    const auto& x = traj.x;
    if (x.empty()) return out;
    const auto pm = detail::prefix_max(x);
    const auto sm = detail::suffix_min(x);
    const double top = pm.back();
    const std::size_t N = x.size() - 1;
    for (std::size_t n0 = 0; n0 <= N; ++n0) {
        if (x[n0] != pm[n0]) continue;
        if (n0 < N && sm[n0 + 1] <= x[n0]) continue;
        const bool strong = (n0 == 0) || (pm[n0 - 1] < x[n0]);
        const Status st =
            top >= x[n0] + W ? Status::confirmed : Status::candidate;
        out.push_back({x[n0], n0, strong, st});
    }
    return out;
}

// n is a cut time iff max_{0<=l<=n} X_l < X_m for all m > n. The vacuous
// n = N is excluded. Confirmation: the path has escaped W above the barrier
// value max_{l<=n} X_l.
inline std::vector<CutTimePoint> detect_cut_times(const Trajectory& traj, double W) {
    if (W < 0) throw std::invalid_argument("confirmation window must be >= 0");
    std::vector<CutTimePoint> out;
    const auto& x = traj.x;
    if (x.size() < 2) return out;
    const auto pm = detail::prefix_max(x);
    const auto sm = detail::suffix_min(x);
    const double top = pm.back();
    for (std::size_t n = 0; n + 1 < x.size(); ++n) {
        if (pm[n] < sm[n + 1]) {
            const Status st =
                top >= pm[n] + W ? Status::confirmed : Status::candidate;
            out.push_back({n, st});
        }
    }
    return out;
}

// S = union over n0 of the open intervals (prefixmax(n0-1), suffixmin(n0+1)),
// with prefixmax(-1) = -inf and suffixmin(N+1) = +inf, intersected with
// [0, inf). Candidate measure clips at max X, confirmed at max X - W.
inline SeparatingSet detect_separating_set(const Trajectory& traj, double W) {
    if (W < 0) throw std::invalid_argument("confirmation window must be >= 0");
    SeparatingSet s;
    s.window = W;
    const auto& x = traj.x;
    if (x.empty()) return s;
    const auto pm = detail::prefix_max(x);
    const auto sm = detail::suffix_min(x);
    const std::size_t N = x.size() - 1;
    s.path_max = pm.back();

    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t n0 = 0; n0 <= N; ++n0) {
        double lo = n0 == 0 ? -inf : pm[n0 - 1];
        const double hi = n0 == N ? inf : sm[n0 + 1];
        if (lo < 0.0 && hi > 0.0) s.includes_zero = true;
        lo = std::max(lo, 0.0);
        if (hi <= lo) continue;
        // lo is nondecreasing in n0, so a sweep merge suffices. Touching
        // intervals stay separate (open intervals; the endpoint is excluded).
        if (!s.intervals.empty() && lo < s.intervals.back().hi) {
            s.intervals.back().hi = std::max(s.intervals.back().hi, hi);
        } else {
            s.intervals.push_back({lo, hi});
        }
    }
    s.candidate_measure = s.measure_in(0.0, s.path_max);
    s.confirmed_measure = s.measure_in(0.0, s.path_max - W);
    return s;
}

// Maximal intervals of [0, max X] whose interior path points are all strong
// cutpoints, with length >= h and at least k interior points. The interval
// family is determined by the "blocking" values (visited values that are not
// strong cutpoints): maximal intervals are the gaps between consecutive
// blocking values, clipped to [0, max X]. Disjoint by construction.
inline std::vector<CutInterval> detect_cut_intervals(const Trajectory& traj,
                                                     double h, std::size_t k,
                                                     double W) {
    if (h <= 0) throw std::invalid_argument("interval length h must be > 0");
    if (W < 0) throw std::invalid_argument("confirmation window must be >= 0");
    std::vector<CutInterval> out;
    const auto& x = traj.x;
    if (x.empty()) return out;
    const auto pm = detail::prefix_max(x);
    const auto sm = detail::suffix_min(x);
    const std::size_t N = x.size() - 1;
    const double top = pm.back();

    std::vector<double> blocking;
    for (std::size_t n = 0; n <= N; ++n) {
        const bool strong = x[n] == pm[n] && (n == N || sm[n + 1] > x[n]) &&
                            (n == 0 || pm[n - 1] < x[n]);
        if (!strong) blocking.push_back(x[n]);
    }
    std::vector<double> edges;
    edges.push_back(0.0);
    for (double v : blocking) edges.push_back(v);
    edges.push_back(top);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::vector<double> sorted_vals(x);
    std::sort(sorted_vals.begin(), sorted_vals.end());

    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double l = edges[i], r = edges[i + 1];
        if (r - l < h) continue;
        const auto lo_it =
            std::upper_bound(sorted_vals.begin(), sorted_vals.end(), l);
        const auto hi_it =
            std::lower_bound(sorted_vals.begin(), sorted_vals.end(), r);
        const std::size_t inside = static_cast<std::size_t>(hi_it - lo_it);
        if (inside < k) continue;
        CutInterval iv;
        iv.l = l;
        iv.r = r;
        iv.k_obs = inside;
        iv.interior.assign(lo_it, hi_it);
        iv.status = top >= r + W ? Status::confirmed : Status::candidate;
        out.push_back(std::move(iv));
    }
    return out;
}

// A cut annulus of the vector path is exactly a cut interval of the norm
// path: the interior visits form one contiguous block with strictly
// increasing norms, everything before stays in the bounded complement
// (norm <= l) and everything after in the unbounded one (norm >= r). These
// refinements are consequences of the interior points being strong cutpoints
// of the norm process, so they are verified, not filtered on.
inline std::vector<CutAnnulus> detect_cut_annuli(const VectorTrajectory& vtraj,
                                                 double h, std::size_t k,
                                                 double W) {
    if (vtraj.dim < 2)
        throw std::invalid_argument("cut annuli need dimension >= 2");
    const Trajectory norms = vtraj.norms();
    std::vector<CutAnnulus> out;
    for (const CutInterval& iv : detect_cut_intervals(norms, h, k, W)) {
        std::size_t first = norms.x.size(), last = 0, count = 0;
        for (std::size_t n = 0; n < norms.x.size(); ++n) {
            if (norms.x[n] > iv.l && norms.x[n] < iv.r) {
                if (count == 0) first = n;
                last = n;
                ++count;
            }
        }
        bool ok = count == iv.k_obs && (count == 0 || last - first + 1 == count);
        for (std::size_t n = first; ok && n < last; ++n)
            ok = norms.x[n] < norms.x[n + 1];
        for (std::size_t n = 0; ok && n < first; ++n) ok = norms.x[n] <= iv.l;
        for (std::size_t n = last + 1; ok && n < norms.x.size(); ++n)
            ok = norms.x[n] >= iv.r;
        if (!ok)
            throw std::logic_error(
                "norm cut interval violates the annulus refinement");
        out.push_back({iv.l, iv.r, first, count, iv.status});
    }
    return out;
}

struct AxFlag {
    double x;
    bool occurred;
    Status status;
};

struct AxScan {
    std::vector<AxFlag> flags;
    double q;                            // grid spacing helper max(1, 2*l*eps)
};

// A_x: at eta_{n,x} (first time > x after n), the next 2*ell increments each
// exceed eps, and after that climb the path never re-enters [0, x + ell*eps]
// within the horizon. Requires the interval-size condition ell*eps >
// max(h, B*k) so that a flagged A_x certifies an (h,k) cut interval, and
// rejects grid values <= X_0 + B*n where that certificate is not available.
inline AxScan detect_Ax_events(const Trajectory& traj, double eps,
                               std::size_t ell, std::size_t n,
                               const std::vector<double>& x_grid, double W,
                               double h, std::size_t k, double B) {
    if (eps <= 0) throw std::invalid_argument("eps must be > 0");
    if (ell == 0) throw std::invalid_argument("ell must be >= 1");
    if (W < 0) throw std::invalid_argument("confirmation window must be >= 0");
    const double le = static_cast<double>(ell) * eps;
    if (!(le > std::max(h, B * static_cast<double>(k))))
        throw std::invalid_argument(
            "need ell*eps > max(h, B*k) for the cut-interval certificate");
    const auto& x = traj.x;
    if (x.empty() || n > x.size() - 1)
        throw std::invalid_argument("start time beyond horizon");

    AxScan scan;
    scan.q = std::max(1.0, 2.0 * le);
    const auto sm = detail::suffix_min(x);
    const auto pm = detail::prefix_max(x);
    const double top = pm.back();
    const std::size_t N = x.size() - 1;

    for (double gx : x_grid) {
        if (gx <= x[0] + B * static_cast<double>(n))
            throw std::invalid_argument(
                "grid value <= X_0 + B*n rejected (certificate unavailable)");
        bool occurred = false;
        std::size_t start = N + 1;
        for (std::size_t m = n; m <= N; ++m)
            if (x[m] > gx) { start = m; break; }
        if (start + 2 * ell <= N) {
            occurred = true;
            for (std::size_t i = 0; i < 2 * ell; ++i)
                if (x[start + i + 1] - x[start + i] <= eps) {
                    occurred = false;
                    break;
                }
            if (occurred && sm[start + 2 * ell] <= gx + le) occurred = false;
        }
        const Status st =
            top >= gx + le + W ? Status::confirmed : Status::candidate;
        scan.flags.push_back({gx, occurred, st});
    }
    return scan;
}

// Aggregate report used by the CLI and the serializers.
inline CutReport analyze(const Trajectory& traj, double W) {
    CutReport r;
    r.cutpoints = detect_cutpoints(traj, W);
    r.separating = detect_separating_set(traj, W);
    r.cut_times = detect_cut_times(traj, W);
    r.horizon = traj.horizon();
    r.window = W;
    return r;
}

inline nlohmann::json to_json(const CutReport& r) {
    nlohmann::json j;
    j["horizon"] = r.horizon;
    j["window"] = r.window;
    auto points = nlohmann::json::array();
    for (const auto& p : r.cutpoints)
        points.push_back({{"x", p.x}, {"n0", p.n0}, {"status", to_string(p.status)}});
    j["cutpoints"] = points;
    auto strong = nlohmann::json::array();
    for (const auto& p : r.cutpoints)
        if (p.strong)
            strong.push_back(
                {{"x", p.x}, {"n0", p.n0}, {"status", to_string(p.status)}});
    j["strong_cutpoints"] = strong;
    auto times = nlohmann::json::array();
    for (const auto& t : r.cut_times)
        times.push_back({{"n", t.n}, {"status", to_string(t.status)}});
    j["cut_times"] = times;
    auto sep = nlohmann::json::array();
    for (const auto& iv : r.separating.intervals) {
        const double hi = std::min(iv.hi, r.separating.path_max);
        if (hi > iv.lo) sep.push_back({{"lo", iv.lo}, {"hi", hi}});
    }
    j["separating_set"] = {{"intervals", sep},
                           {"candidate_measure", r.separating.candidate_measure},
                           {"confirmed_measure", r.separating.confirmed_measure}};
    return j;
}

inline void write_cut_report_csv(const CutReport& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "x,n0,strong,status\n";
    for (const auto& p : r.cutpoints)
        out << detail::fmt_double(p.x) << ',' << p.n0 << ',' << (p.strong ? 1 : 0)
            << ',' << to_string(p.status) << '\n';
}

} // namespace cutl
