#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cutl/cut_analysis.hpp"
#include "cutl/factory.hpp"
#include "cutl/hitting.hpp"
#include "cutl/process.hpp"
#include "cutl/stats.hpp"

// Batch experiment harness. Each runner consumes an ExperimentConfig, runs
// `replicas` independent paths (streams derived from the seed, so results
// are reproducible and independent of execution order), aggregates
// per-checkpoint statistics, and returns a table plus fit diagnostics.

namespace cutl {

inline constexpr const char* kCutlVersionString = "1.0.0";

struct ExperimentConfig {
    nlohmann::json generator;           // factory spec
    std::size_t replicas = 200;
    std::size_t steps = 1'000'000;
    std::uint64_t seed = 1;
    double start = 0.0;                 // scalar start state
    double h = 1.0;                     // cut-interval length floor
    std::size_t k = 1;                  // cut-interval point floor
    double eps = 0.25;                  // climb threshold for A_x scans
    std::size_t ell = 0;                // climb length for A_x scans
    double window = 0.0;                // confirmation window W; 0 -> 50*B
    std::vector<double> checkpoints;    // increasing levels/radii
    bool exploratory = false;

    void validate() const {
        if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
        if (steps < 1) throw std::invalid_argument("steps must be >= 1");
        if (checkpoints.size() < 2)
            throw std::invalid_argument("need at least 2 checkpoints");
        for (std::size_t i = 1; i < checkpoints.size(); ++i)
            if (!(checkpoints[i - 1] < checkpoints[i]))
                throw std::invalid_argument("checkpoints must be increasing");
    }

    double effective_window(double jump_bound) const {
        return window > 0.0 ? window : 50.0 * jump_bound;
    }

    nlohmann::json to_json() const {
        return {{"generator", generator}, {"replicas", replicas},
                {"steps", steps},         {"seed", seed},
                {"start", start},         {"h", h},
                {"k", k},                 {"eps", eps},
                {"ell", ell},             {"window", window},
                {"checkpoints", checkpoints}, {"exploratory", exploratory}};
    }

    static ExperimentConfig from_json(const nlohmann::json& j) {
        ExperimentConfig c;
        c.generator = j.at("generator");
        c.replicas = j.value("replicas", c.replicas);
        c.steps = j.value("steps", c.steps);
        c.seed = j.value("seed", c.seed);
        c.start = j.value("start", c.start);
        c.h = j.value("h", c.h);
        c.k = j.value("k", c.k);
        c.eps = j.value("eps", c.eps);
        c.ell = j.value("ell", c.ell);
        c.window = j.value("window", c.window);
        if (j.contains("checkpoints"))
            c.checkpoints = j.at("checkpoints").get<std::vector<double>>();
        else
            c.checkpoints = dyadic_checkpoints(4, 10);
        c.exploratory = j.value("exploratory", c.exploratory);
        return c;
    }

    static std::vector<double> dyadic_checkpoints(int j_lo, int j_hi) {
        std::vector<double> out;
        for (int j = j_lo; j <= j_hi; ++j) out.push_back(std::ldexp(1.0, j));
        return out;
    }
};

struct ExperimentResult {
    std::string name;
    nlohmann::json config_echo;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    nlohmann::json diagnostics;

    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open for writing: " + path);
        for (std::size_t i = 0; i < columns.size(); ++i)
            out << (i ? "," : "") << columns[i];
        out << '\n';
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i)
                out << (i ? "," : "") << detail::fmt_double(row[i]);
            out << '\n';
        }
    }

    nlohmann::json manifest(double wall_ms = 0.0) const {
        return {{"experiment", name},
                {"config", config_echo},
                {"columns", columns},
                {"diagnostics", diagnostics},
                {"versions", {{"cutl", kCutlVersionString}, {"table_format", 1}}},
                {"wall_ms", wall_ms}};
    }
};

// Spec-facing regression helper: >= 3 points, strictly increasing abscissa.
inline stats::LinFit fit_log_growth(
    const std::vector<std::pair<double, double>>& points,
    stats::GrowthModel model) {
    if (points.size() < 3)
        throw std::invalid_argument("fit_log_growth: need >= 3 points");
    std::vector<double> xs, ys;
    for (const auto& [x, y] : points) {
        if (!xs.empty() && !(x > xs.back()))
            throw std::invalid_argument("fit_log_growth: x must be strictly increasing");
        xs.push_back(x);
        ys.push_back(y);
    }
    return stats::fit_log_growth(xs, ys, model);
}

namespace detail {

inline nlohmann::json fit_json(const stats::LinFit& f) {
    return {{"slope", f.slope},
            {"intercept", f.intercept},
            {"r2", f.r2},
            {"slope_ci95", f.slope_ci95()}};
}

inline Regime require_scalar_tag(const ScalarProcess& spec, bool exploratory,
                                 const char* op) {
    const Regime tag = spec.profile().regime_tag;
    if (tag == Regime::recurrent && !exploratory)
        throw std::invalid_argument(
            std::string(op) + ": refusing recurrent-tagged generator " +
            spec.id() + " (vacuous run); pass exploratory to override");
    return tag;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Growth of the strong-cutpoint count. For each checkpoint x, the mean over
// replicas of #(strong cutpoints with value in [0, x]) -- CONFIRMED and
// CANDIDATE brackets -- and of disjoint (h,k) cut intervals with outer edge
// <= x; plus least-squares fits of the means against log x.
inline ExperimentResult run_cutpoint_growth(const ExperimentConfig& cfg) {
    cfg.validate();
    auto spec = make_scalar_process(cfg.generator);
    detail::require_scalar_tag(*spec, cfg.exploratory, "run_cutpoint_growth");
    const double W = cfg.effective_window(spec->profile().jump_bound);

    const std::size_t m = cfg.checkpoints.size();
    std::vector<double> strong_conf(m, 0.0), strong_cand(m, 0.0);
    std::vector<double> iv_conf(m, 0.0), iv_cand(m, 0.0);

    for (std::size_t r = 0; r < cfg.replicas; ++r) {
        const Trajectory traj = simulate(*spec, cfg.start, cfg.steps,
                                         Rng::derive(cfg.seed, r));
        const auto cps = detect_cutpoints(traj, W);
        const auto ivs = detect_cut_intervals(traj, cfg.h, cfg.k, W);
        for (std::size_t i = 0; i < m; ++i) {
            const double x = cfg.checkpoints[i];
            for (const auto& p : cps) {
                if (!p.strong || p.x > x) continue;
                strong_cand[i] += 1.0;
                if (p.status == Status::confirmed) strong_conf[i] += 1.0;
            }
            for (const auto& iv : ivs) {
                if (iv.r > x) continue;
                iv_cand[i] += 1.0;
                if (iv.status == Status::confirmed) iv_conf[i] += 1.0;
            }
        }
    }

    ExperimentResult res;
    res.name = "cutpoint_growth";
    res.config_echo = cfg.to_json();
    res.columns = {"x", "strong_confirmed_mean", "strong_candidate_mean",
                   "intervals_confirmed_mean", "intervals_candidate_mean"};
    const double R = static_cast<double>(cfg.replicas);
    std::vector<double> xs, conf_means, cand_means;
    for (std::size_t i = 0; i < m; ++i) {
        res.rows.push_back({cfg.checkpoints[i], strong_conf[i] / R,
                            strong_cand[i] / R, iv_conf[i] / R,
                            iv_cand[i] / R});
        xs.push_back(cfg.checkpoints[i]);
        conf_means.push_back(strong_conf[i] / R);
        cand_means.push_back(strong_cand[i] / R);
    }
    res.diagnostics = {
        {"window", W},
        {"fit_confirmed_vs_logx",
         detail::fit_json(stats::fit_log_growth(xs, conf_means,
                                                stats::GrowthModel::log_x))},
        {"fit_candidate_vs_logx",
         detail::fit_json(stats::fit_log_growth(xs, cand_means,
                                                stats::GrowthModel::log_x))}};
    return res;
}

// ---------------------------------------------------------------------------
// Dyadic block statistics. For each block [x, 2x]: the frequency of
// E_x = {some cutpoint value lands in [x, 2x]}, the mean of
// M_x = |S intersect [x/2, 2x]|, and the mean of M_x restricted to E_x.
// Diagnostics: a one-sided decreasing-trend z-test on the CONFIRMED block
// frequencies (weighted by inverse binomial variance) and a fit of the
// frequency against 1/log^2 x.
inline ExperimentResult run_dyadic_block_stats(const ExperimentConfig& cfg) {
    cfg.validate();
    auto spec = make_scalar_process(cfg.generator);
    const double W = cfg.effective_window(spec->profile().jump_bound);

    const std::size_t m = cfg.checkpoints.size();
    std::vector<double> ex_conf(m, 0.0), ex_cand(m, 0.0);
    std::vector<double> mx_sum(m, 0.0), mx_conf_sum(m, 0.0), mx_ex_sum(m, 0.0);

    for (std::size_t r = 0; r < cfg.replicas; ++r) {
        const Trajectory traj = simulate(*spec, cfg.start, cfg.steps,
                                         Rng::derive(cfg.seed, r));
        const auto cps = detect_cutpoints(traj, W);
        const auto sep = detect_separating_set(traj, W);
        const double conf_cap = traj.max() - W;
        for (std::size_t i = 0; i < m; ++i) {
            const double x = cfg.checkpoints[i];
            bool any_cand = false, any_conf = false;
            for (const auto& p : cps) {
                if (p.x < x || p.x > 2.0 * x) continue;
                any_cand = true;
                if (p.status == Status::confirmed) any_conf = true;
            }
            ex_cand[i] += any_cand ? 1.0 : 0.0;
            ex_conf[i] += any_conf ? 1.0 : 0.0;
            const double mx = sep.measure_in(x / 2.0, 2.0 * x);
            mx_sum[i] += mx;
            mx_conf_sum[i] += sep.measure_in(x / 2.0, std::min(2.0 * x, conf_cap));
            if (any_conf) mx_ex_sum[i] += mx;
        }
    }

    ExperimentResult res;
    res.name = "dyadic_blocks";
    res.config_echo = cfg.to_json();
    res.columns = {"x",         "p_ex_confirmed",    "p_ex_candidate",
                   "m_x_mean",  "m_x_confirmed_mean", "m_x_given_ex_mean"};
    const double R = static_cast<double>(cfg.replicas);
    std::vector<double> xs, p_conf, weights;
    for (std::size_t i = 0; i < m; ++i) {
        const double p = ex_conf[i] / R;
        res.rows.push_back({cfg.checkpoints[i], p, ex_cand[i] / R,
                            mx_sum[i] / R, mx_conf_sum[i] / R,
                            ex_conf[i] > 0.0 ? mx_ex_sum[i] / ex_conf[i] : 0.0});
        xs.push_back(cfg.checkpoints[i]);
        p_conf.push_back(p);
        weights.push_back(R / (p * (1.0 - p) + 1e-3));
    }
    const auto trend =
        stats::fit_log_growth(xs, p_conf, stats::GrowthModel::log_x, &weights);
    res.diagnostics = {
        {"window", W},
        {"trend",
         {{"slope", trend.slope},
          {"slope_se", trend.slope_se},
          {"z", trend.trend_z()},
          {"decreasing_at_5pct", trend.trend_z() < -stats::kZ95OneSided}}},
        {"fit_inv_log_sq",
         detail::fit_json(stats::fit_log_growth(
             xs, p_conf, stats::GrowthModel::inv_log_sq_x))}};
    return res;
}

// ---------------------------------------------------------------------------
// Frequency of the climb-and-escape event A_x on a level grid. Reports
// P-hat(A_x), x*P-hat and x*log(x)*P-hat per level, with multiplicative
// window stability of both scalings (max/median and min/median ratios).
inline ExperimentResult run_Ax_frequency(const ExperimentConfig& cfg) {
    cfg.validate();
    auto spec = make_scalar_process(cfg.generator);
    detail::require_scalar_tag(*spec, cfg.exploratory, "run_Ax_frequency");
    const double B = spec->profile().jump_bound;
    const double W = cfg.effective_window(B);
    if (cfg.ell == 0)
        throw std::invalid_argument("run_Ax_frequency: need ell >= 1");

    const std::size_t m = cfg.checkpoints.size();
    std::vector<double> hits(m, 0.0);
    double q = 0.0;
    for (std::size_t r = 0; r < cfg.replicas; ++r) {
        const Trajectory traj = simulate(*spec, cfg.start, cfg.steps,
                                         Rng::derive(cfg.seed, r));
        const AxScan scan = detect_Ax_events(traj, cfg.eps, cfg.ell, 0,
                                             cfg.checkpoints, W, cfg.h, cfg.k, B);
        q = scan.q;
        for (std::size_t i = 0; i < m; ++i)
            hits[i] += scan.flags[i].occurred ? 1.0 : 0.0;
    }

    ExperimentResult res;
    res.name = "ax_frequency";
    res.config_echo = cfg.to_json();
    res.columns = {"x", "p_hat", "x_p", "xlogx_p"};
    const double R = static_cast<double>(cfg.replicas);
    std::vector<double> xp, xlogxp;
    for (std::size_t i = 0; i < m; ++i) {
        const double x = cfg.checkpoints[i];
        const double p = hits[i] / R;
        res.rows.push_back({x, p, x * p, x * std::log(x) * p});
        xp.push_back(x * p);
        xlogxp.push_back(x * std::log(x) * p);
    }
    auto window_stats = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const double med = v[v.size() / 2];
        nlohmann::json j = {{"median", med}};
        j["max_over_median"] = med > 0.0 ? v.back() / med : 0.0;
        j["min_over_median"] = med > 0.0 ? v.front() / med : 0.0;
        return j;
    };
    res.diagnostics = {{"window", W},
                       {"q", q},
                       {"window_x_p", window_stats(xp)},
                       {"window_xlogx_p", window_stats(xlogxp)}};
    return res;
}

// ---------------------------------------------------------------------------
// Cut annuli of a vector walk. Checkpoints are radii; for each, the mean
// count of annuli with inner radius <= that checkpoint (confirmed and
// candidate) and the fraction of replicas holding at least one confirmed
// annulus there.
inline ExperimentResult run_annuli_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    auto spec = make_vector_process(cfg.generator);
    const Regime tag = spec->profile().regime_tag;
    if (tag != Regime::transient_many_cutpoints && !cfg.exploratory)
        throw std::invalid_argument(
            "run_annuli_experiment: generator " + spec->id() +
            " is not tagged for transient annulus growth; pass exploratory to override");
    const double W = cfg.effective_window(spec->profile().jump_bound);

    const std::size_t m = cfg.checkpoints.size();
    std::vector<double> conf(m, 0.0), cand(m, 0.0), any_conf(m, 0.0);
    const std::vector<double> origin(spec->dim(), 0.0);

    for (std::size_t r = 0; r < cfg.replicas; ++r) {
        const VectorTrajectory traj = simulate(*spec, origin, cfg.steps,
                                               Rng::derive(cfg.seed, r));
        const auto annuli = detect_cut_annuli(traj, cfg.h, cfg.k, W);
        for (std::size_t i = 0; i < m; ++i) {
            const double radius = cfg.checkpoints[i];
            std::size_t nc = 0, na = 0;
            for (const auto& an : annuli) {
                if (an.l > radius) continue;
                ++na;
                if (an.status == Status::confirmed) ++nc;
            }
            conf[i] += static_cast<double>(nc);
            cand[i] += static_cast<double>(na);
            any_conf[i] += nc > 0 ? 1.0 : 0.0;
        }
    }

    ExperimentResult res;
    res.name = "annuli";
    res.config_echo = cfg.to_json();
    res.columns = {"radius", "confirmed_mean", "candidate_mean",
                   "frac_with_confirmed"};
    const double R = static_cast<double>(cfg.replicas);
    std::vector<double> radii, conf_means;
    for (std::size_t i = 0; i < m; ++i) {
        res.rows.push_back({cfg.checkpoints[i], conf[i] / R, cand[i] / R,
                            any_conf[i] / R});
        radii.push_back(cfg.checkpoints[i]);
        conf_means.push_back(conf[i] / R);
    }
    res.diagnostics = {
        {"window", W},
        {"fit_confirmed_vs_log_radius",
         detail::fit_json(stats::fit_log_growth(radii, conf_means,
                                                stats::GrowthModel::log_x))}};
    return res;
}

} // namespace cutl
