#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

// Reference implementations by direct quantifier scan, deliberately slow
// (O(N^2) or worse) and written straight from the definitions with no shared
// machinery (no prefix-max/suffix-min arrays, no sorting tricks shared with
// the library). The fast detectors are tested against these, never the other
// way around.

namespace oracle {

using Path = std::vector<double>;

// --- cutpoints (Definition: X_n <= x for n <= n0, X_{n0} = x, X_n > x for
// --- n0 < n <= N; strong replaces <= by < before n0) -----------------------

inline bool is_cutpoint_at(const Path& p, std::size_t n0) {
    for (std::size_t n = 0; n < n0; ++n)
        if (p[n] > p[n0]) return false;
    for (std::size_t n = n0 + 1; n < p.size(); ++n)
        if (p[n] <= p[n0]) return false;
    return true;
}

inline bool is_strong_cutpoint_at(const Path& p, std::size_t n0) {
    for (std::size_t n = 0; n < n0; ++n)
        if (p[n] >= p[n0]) return false;
    for (std::size_t n = n0 + 1; n < p.size(); ++n)
        if (p[n] <= p[n0]) return false;
    return true;
}

struct Hit {
    double x;
    std::size_t n0;
    bool operator==(const Hit&) const = default;
};

inline std::vector<Hit> cutpoints(const Path& p) {
    std::vector<Hit> out;
    for (std::size_t n0 = 0; n0 < p.size(); ++n0)
        if (is_cutpoint_at(p, n0)) out.push_back({p[n0], n0});
    return out;
}

inline std::vector<Hit> strong_cutpoints(const Path& p) {
    std::vector<Hit> out;
    for (std::size_t n0 = 0; n0 < p.size(); ++n0)
        if (is_strong_cutpoint_at(p, n0)) out.push_back({p[n0], n0});
    return out;
}

// --- cut times (max_{0<=l<=n} X_l < X_m for all m > n; the vacuous n = N is
// --- excluded so the set stays meaningful at a finite horizon) --------------

inline std::vector<std::size_t> cut_times(const Path& p) {
    std::vector<std::size_t> out;
    if (p.size() < 2) return out;
    for (std::size_t n = 0; n + 1 < p.size(); ++n) {
        double past_max = p[0];
        for (std::size_t l = 1; l <= n; ++l) past_max = std::max(past_max, p[l]);
        bool ok = true;
        for (std::size_t m = n + 1; m < p.size(); ++m)
            if (p[m] <= past_max) { ok = false; break; }
        if (ok) out.push_back(n);
    }
    return out;
}

// --- separating points (exists n0: X_n < x for n < n0 and X_n > x for
// --- n > n0; x need not be visited) ----------------------------------------

inline bool is_separating(const Path& p, double x) {
    for (std::size_t n0 = 0; n0 < p.size(); ++n0) {
        bool ok = true;
        for (std::size_t n = 0; n < n0 && ok; ++n)
            if (p[n] >= x) ok = false;
        for (std::size_t n = n0 + 1; n < p.size() && ok; ++n)
            if (p[n] <= x) ok = false;
        if (ok) return true;
    }
    return false;
}

// Measure of S intersected with [lo, hi]. Works because S is a union of open
// intervals whose endpoints are path values (or 0/infinity): membership is
// constant between consecutive distinct path values, so probing each cell's
// midpoint integrates the measure exactly.
inline double separating_measure(const Path& p, double lo, double hi) {
    if (p.empty() || hi <= lo) return 0.0;
    std::set<double> cuts{lo, hi};
    for (double v : p)
        if (v > lo && v < hi) cuts.insert(v);
    std::vector<double> edges(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double mid = 0.5 * (edges[i] + edges[i + 1]);
        if (is_separating(p, mid)) total += edges[i + 1] - edges[i];
    }
    return total;
}

// --- (h,k) cut intervals ----------------------------------------------------
// Maximal intervals [l, r] within [0, max X] whose interior path points are
// all strong cutpoints, with r - l >= h and at least k interior path points.
// Enumerated from candidate endpoint pairs and checked by definition scans.

struct Interval {
    double l, r;
    std::size_t interior_points;
    bool operator==(const Interval&) const = default;
};

inline bool interior_all_strong(const Path& p, double l, double r) {
    for (std::size_t n = 0; n < p.size(); ++n)
        if (p[n] > l && p[n] < r && !is_strong_cutpoint_at(p, n)) return false;
    return true;
}

inline std::size_t points_inside(const Path& p, double l, double r) {
    std::size_t c = 0;
    for (double v : p)
        if (v > l && v < r) ++c;
    return c;
}

inline std::vector<Interval> cut_intervals(const Path& p, double h, std::size_t k) {
    std::vector<Interval> out;
    if (p.empty()) return out;
    const double top = *std::max_element(p.begin(), p.end());

    // Candidate endpoints: 0, the top, and every visited value that fails to
    // be a strong cutpoint at one of its visit times (a "blocking" value).
    std::set<double> ends{0.0, top};
    for (std::size_t n = 0; n < p.size(); ++n)
        if (!is_strong_cutpoint_at(p, n)) ends.insert(p[n]);

    for (double a : ends) {
        for (double b : ends) {
            if (b <= a) continue;
            if (!interior_all_strong(p, a, b)) continue;
            // Maximality: no blocking value strictly inside, and the endpoints
            // cannot be pushed outward (they sit on blocking values or the
            // clip boundary [0, top]).
            bool endpoint_ok = true;
            for (double c : ends)
                if (c > a && c < b) { endpoint_ok = false; break; }
            if (!endpoint_ok) continue;
            if (b - a < h) continue;
            const std::size_t inside = points_inside(p, a, b);
            if (inside < k) continue;
            out.push_back({a, b, inside});
        }
    }
    std::sort(out.begin(), out.end(),
              [](const Interval& u, const Interval& v) { return u.l < v.l; });
    return out;
}

// --- cut annuli -------------------------------------------------------------
// Annulus (l, r) of width >= h for which there exist m and len >= k-1 with
// the first m norms <= l, norms m..m+len strictly increasing inside (l, r),
// and all later norms >= r. Scanned directly over the norm sequence.

struct Annulus {
    double l, r;
    std::size_t entry;      // m
    std::size_t inside;     // len + 1 interior visits
    bool operator==(const Annulus&) const = default;
};

inline std::optional<Annulus> check_annulus(const Path& norms, double l, double r,
                                            double h, std::size_t k) {
    if (r - l < h) return std::nullopt;
    // Locate the interior visits; they must form one contiguous block.
    std::vector<std::size_t> in;
    for (std::size_t n = 0; n < norms.size(); ++n)
        if (norms[n] > l && norms[n] < r) in.push_back(n);
    if (in.size() < k) return std::nullopt;
    for (std::size_t i = 0; i + 1 < in.size(); ++i)
        if (in[i + 1] != in[i] + 1) return std::nullopt;
    for (std::size_t i = 0; i + 1 < in.size(); ++i)
        if (norms[in[i]] >= norms[in[i + 1]]) return std::nullopt;
    const std::size_t m = in.front();
    for (std::size_t n = 0; n < m; ++n)
        if (norms[n] > l) return std::nullopt;
    for (std::size_t n = in.back() + 1; n < norms.size(); ++n)
        if (norms[n] < r) return std::nullopt;
    return Annulus{l, r, m, in.size()};
}

inline std::vector<Annulus> cut_annuli(const Path& norms, double h, std::size_t k) {
    std::vector<Annulus> out;
    for (const Interval& iv : cut_intervals(norms, h, k)) {
        auto a = check_annulus(norms, iv.l, iv.r, h, k);
        if (a) out.push_back(*a);
    }
    return out;
}

// --- stopping times and the A_x event --------------------------------------

inline std::optional<std::size_t> tau(const Path& p, std::size_t n, double x) {
    for (std::size_t m = n; m < p.size(); ++m)
        if (p[m] <= x) return m;
    return std::nullopt;
}

inline std::optional<std::size_t> eta(const Path& p, std::size_t n, double x) {
    for (std::size_t m = n; m < p.size(); ++m)
        if (p[m] > x) return m;
    return std::nullopt;
}

// A_x: at eta_{n,x}, the next 2*ell increments each exceed eps, and from the
// end of that climb the path stays above x + ell*eps to the horizon.
inline bool ax_event(const Path& p, std::size_t n, double x, double eps,
                     std::size_t ell) {
    auto e = eta(p, n, x);
    if (!e) return false;
    const std::size_t start = *e;
    if (start + 2 * ell >= p.size()) return false;
    for (std::size_t i = 0; i < 2 * ell; ++i)
        if (p[start + i + 1] - p[start + i] <= eps) return false;
    for (std::size_t m = start + 2 * ell; m < p.size(); ++m)
        if (p[m] <= x + ell * eps) return false;
    return true;
}

// --- birth-death ruin probability ------------------------------------------
// P_start(hit b before a) for a nearest-neighbour chain with up-probability
// p(i) on the interior, solved as the boundary-value problem
//   h(a) = 0, h(b) = 1, h(i) = p(i) h(i+1) + (1-p(i)) h(i-1)
// by the Thomas tridiagonal algorithm — an independent route from any
// product/scale-function formula.
template <typename UpProb>
double ruin_hit_upper(UpProb p, long a, long start, long b) {
    if (!(a < start && start < b)) throw std::invalid_argument("need a < start < b");
    const std::size_t n = static_cast<std::size_t>(b - a - 1);    // unknowns
    std::vector<double> diag(n, 1.0), lower(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const long i = a + 1 + static_cast<long>(j);
        const double pi = p(i);
        if (!(pi > 0.0 && pi < 1.0))
            throw std::invalid_argument("interior up-probability must be in (0,1)");
        if (j > 0) lower[j] = -(1.0 - pi);
        if (j + 1 < n) upper[j] = -pi;
        if (j + 1 == n) rhs[j] = pi;     // h(b) = 1 boundary
    }
    for (std::size_t j = 1; j < n; ++j) {
        const double w = lower[j] / diag[j - 1];
        diag[j] -= w * upper[j - 1];
        rhs[j] -= w * rhs[j - 1];
    }
    std::vector<double> h(n);
    h[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t j = n - 1; j-- > 0;)
        h[j] = (rhs[j] - upper[j] * h[j + 1]) / diag[j];
    return h[static_cast<std::size_t>(start - a - 1)];
}

} // namespace oracle
