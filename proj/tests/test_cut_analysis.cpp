#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <functional>
#include <set>
#include <vector>

#include "cutl/cut_analysis.hpp"
#include "cutl/generators.hpp"
#include "cutl/process.hpp"
#include "cutl/rng.hpp"
#include "oracles.hpp"

using namespace cutl;
using oracle::Path;

namespace {

Trajectory make_traj(const Path& p) {
    Trajectory t;
    t.x = p;
    return t;
}

// Calls fn on every path of the given length over the alphabet.
void for_each_path(const std::vector<double>& alphabet, std::size_t length,
                   const std::function<void(const Path&)>& fn) {
    Path p(length, alphabet[0]);
    std::vector<std::size_t> digits(length, 0);
    while (true) {
        fn(p);
        std::size_t i = 0;
        while (i < length) {
            if (++digits[i] < alphabet.size()) {
                p[i] = alphabet[digits[i]];
                break;
            }
            digits[i] = 0;
            p[i] = alphabet[0];
            ++i;
        }
        if (i == length) return;
    }
}

void check_pointwise_detectors(const Path& p) {
    INFO("path size " << p.size());
    const Trajectory t = make_traj(p);

    const auto got = detect_cutpoints(t, 0.0);
    const auto want = oracle::cutpoints(p);
    const auto want_strong = oracle::strong_cutpoints(p);
    REQUIRE(got.size() == want.size());
    std::size_t strong_seen = 0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].x == want[i].x);
        CHECK(got[i].n0 == want[i].n0);
        CHECK(got[i].strong == oracle::is_strong_cutpoint_at(p, got[i].n0));
        strong_seen += got[i].strong ? 1 : 0;
    }
    CHECK(strong_seen == want_strong.size());

    const auto times = detect_cut_times(t, 0.0);
    const auto want_times = oracle::cut_times(p);
    REQUIRE(times.size() == want_times.size());
    for (std::size_t i = 0; i < times.size(); ++i)
        CHECK(times[i].n == want_times[i]);

    const auto sep = detect_separating_set(t, 0.0);
    if (!p.empty()) {
        const double top = *std::max_element(p.begin(), p.end());
        CHECK(sep.candidate_measure ==
              Catch::Approx(oracle::separating_measure(p, 0.0, top)).margin(1e-12));
        // Membership probes between consecutive distinct values and beyond.
        std::set<double> vals(p.begin(), p.end());
        vals.insert(0.0);
        std::vector<double> sorted(vals.begin(), vals.end());
        std::vector<double> probes;
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
            probes.push_back(0.5 * (sorted[i] + sorted[i + 1]));
        probes.push_back(top + 0.5);
        for (double v : sorted) probes.push_back(v);
        for (double q : probes)
            if (q >= 0.0) {
                INFO("probe " << q);
                CHECK(sep.contains(q) == oracle::is_separating(p, q));
            }
    }
    // Interval structure invariants.
    for (std::size_t i = 0; i < sep.intervals.size(); ++i) {
        CHECK(sep.intervals[i].lo < sep.intervals[i].hi);
        if (i > 0) CHECK(sep.intervals[i - 1].hi <= sep.intervals[i].lo);
    }
}

void check_interval_detector(const Path& p, double h, std::size_t k) {
    INFO("path size " << p.size() << " h=" << h << " k=" << k);
    const auto got = detect_cut_intervals(make_traj(p), h, k, 0.0);
    const auto want = oracle::cut_intervals(p, h, k);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].l == want[i].l);
        CHECK(got[i].r == want[i].r);
        CHECK(got[i].k_obs == want[i].interior_points);
        CHECK(got[i].interior.size() == got[i].k_obs);
        CHECK(std::is_sorted(got[i].interior.begin(), got[i].interior.end()));
        for (double v : got[i].interior) {
            CHECK(v > got[i].l);
            CHECK(v < got[i].r);
        }
    }
}

// Pathwise identity relating cutpoint and cut-time counts: a cutpoint before
// the horizon is exactly a cut time whose position sits at the running
// maximum, and the final point contributes iff it is the path maximum.
void check_count_identity(const Path& p) {
    if (p.size() < 2) return;
    const Trajectory t = make_traj(p);
    const auto cps = detect_cutpoints(t, 0.0);
    const auto cts = detect_cut_times(t, 0.0);

    double run_max = p[0];
    std::size_t below_max_cut_times = 0;
    for (const auto& ct : cts) {
        run_max = p[0];
        for (std::size_t l = 1; l <= ct.n; ++l) run_max = std::max(run_max, p[l]);
        if (p[ct.n] < run_max) ++below_max_cut_times;
    }
    const double top = *std::max_element(p.begin(), p.end());
    const int final_at_max = p.back() == top ? 1 : 0;
    CHECK(static_cast<long>(cps.size()) - static_cast<long>(cts.size()) ==
          final_at_max - static_cast<long>(below_max_cut_times));
}

Path random_real_path(Rng& rng, std::size_t len, double scale) {
    Path p(len);
    for (double& v : p) v = rng.uniform() * scale;
    return p;
}

} // namespace

TEST_CASE("detectors agree with definition scans on every binary path") {
    for (std::size_t len = 1; len <= 10; ++len)
        for_each_path({0.0, 1.0}, len, [](const Path& p) {
            check_pointwise_detectors(p);
            check_count_identity(p);
        });
}

TEST_CASE("detectors agree with definition scans on every 4-letter path") {
    for (std::size_t len = 1; len <= 6; ++len)
        for_each_path({0.0, 1.0, 2.0, 3.0}, len, [](const Path& p) {
            check_pointwise_detectors(p);
        });
}

TEST_CASE("detectors agree with definition scans on random real paths") {
    Rng rng(404);
    for (int rep = 0; rep < 200; ++rep) {
        const Path p = random_real_path(rng, 40, 10.0);
        check_pointwise_detectors(p);
        check_count_identity(p);
    }
}

TEST_CASE("interval detector agrees with the definition scan") {
    for (std::size_t len = 1; len <= 6; ++len)
        for_each_path({0.0, 1.0, 2.0, 3.0}, len, [](const Path& p) {
            check_interval_detector(p, 1.0, 1);
            check_interval_detector(p, 2.0, 2);
        });
    Rng rng(405);
    for (int rep = 0; rep < 100; ++rep) {
        const Path p = random_real_path(rng, 30, 8.0);
        for (double h : {0.5, 1.0, 2.0})
            for (std::size_t k : {std::size_t{1}, std::size_t{2}, std::size_t{3}})
                check_interval_detector(p, h, k);
    }
}

TEST_CASE("monotone path: one interval spanning the whole range") {
    Path p;
    for (int n = 0; n <= 20; ++n) p.push_back(static_cast<double>(n));
    const auto got = detect_cut_intervals(make_traj(p), 1.0, 1, 0.0);
    REQUIRE(got.size() == 1);
    CHECK(got[0].l == 0.0);
    CHECK(got[0].r == 20.0);
    CHECK(got[0].k_obs == 19);
}

TEST_CASE("doubled staircase: cutpoints exist but none are strong") {
    // 0,0,1,1,2,2,...: each level's second visit is a cutpoint, but the first
    // visit blocks strongness, so no strong cutpoints and no cut intervals.
    Path p;
    for (int lvl = 0; lvl <= 3; ++lvl) {
        p.push_back(lvl);
        p.push_back(lvl);
    }
    const Trajectory t = make_traj(p);
    const auto cps = detect_cutpoints(t, 0.0);
    CHECK_FALSE(cps.empty());
    for (const auto& cp : cps) CHECK_FALSE(cp.strong);

    CHECK(detect_cut_intervals(t, 0.5, 1, 0.0).empty());

    // The separating set is still rich: strips between levels, certified by
    // the second visit of each level.
    const auto sep = detect_separating_set(t, 0.0);
    CHECK(sep.candidate_measure == Catch::Approx(3.0));
    CHECK(sep.contains(0.5));
    CHECK_FALSE(sep.contains(1.0));
    CHECK(oracle::separating_measure(p, 0.0, 3.0) == Catch::Approx(3.0));
}

TEST_CASE("even climb: every point is a strong cutpoint") {
    Path p;
    for (int n = 0; n <= 10; ++n) p.push_back(2.0 * n);
    const Trajectory t = make_traj(p);
    const auto cps = detect_cutpoints(t, 0.0);
    REQUIRE(cps.size() == p.size());
    for (const auto& cp : cps) CHECK(cp.strong);
    const auto sep = detect_separating_set(t, 0.0);
    CHECK(sep.candidate_measure == Catch::Approx(20.0));
}

TEST_CASE("touching separating intervals stay distinct") {
    // At x = 1 the path value 1 is visited between the strips, so (0,1) and
    // (1,3) must not merge across it.
    const Path p = {0.0, 1.0, 1.0, 2.0, 3.0};
    const auto sep = detect_separating_set(make_traj(p), 0.0);
    REQUIRE(sep.intervals.size() == 2);
    CHECK(sep.intervals[0].lo == 0.0);
    CHECK(sep.intervals[0].hi == 1.0);
    CHECK(sep.intervals[1].lo == 1.0);
    CHECK_FALSE(sep.contains(1.0));
    CHECK(oracle::is_separating(p, 0.5));
    CHECK_FALSE(oracle::is_separating(p, 1.0));
    CHECK(sep.candidate_measure == Catch::Approx(3.0));
}

TEST_CASE("count inequality holds for unit-up lattice chains") {
    // Chains whose climbs move one integer at a time visit the running
    // maximum at every cut time, so cutpoints dominate cut times.
    Rng seeds(777);
    for (int rep = 0; rep < 60; ++rep) {
        const std::uint64_t seed = seeds.next();
        const Trajectory bd = simulate(BdLamperti(2.0), 0.0, 300, seed);
        const Trajectory pm = simulate(PlusOneMinusTwo(3.0), 0.0, 300, seed + 1);
        for (const Trajectory* t : {&bd, &pm}) {
            const auto cps = detect_cutpoints(*t, 0.0);
            const auto cts = detect_cut_times(*t, 0.0);
            CHECK(cps.size() >= cts.size());
            check_count_identity(t->x);
        }
    }
}

TEST_CASE("count inequality can fail off the lattice") {
    // A climb that jumps past its old maximum creates a cut time with no
    // cutpoint at it; this frozen path has three cut times but one cutpoint.
    const Path p = {2.0, 1.0, 1.414, 2.236, 2.1, 2.9, 2.5, 3.3};
    const Trajectory t = make_traj(p);
    CHECK(detect_cutpoints(t, 0.0).size() == 1);
    CHECK(detect_cut_times(t, 0.0).size() == 3);
    check_count_identity(p);
}

TEST_CASE("from the origin, nonempty separating strips touch a cut time") {
    // For paths started at 0: whenever the strip contributed at time n0
    // intersects [0, max X], one of n0-1, n0 is a cut time. Checked
    // exhaustively on short origin walks and on simulated chains.
    auto check_adjacency = [](const Path& p) {
        if (p.size() < 2) return;
        const std::size_t N = p.size() - 1;
        const double top = *std::max_element(p.begin(), p.end());
        const auto cts = detect_cut_times(make_traj(p), 0.0);
        std::set<std::size_t> tset;
        for (const auto& ct : cts) tset.insert(ct.n);
        for (std::size_t n0 = 0; n0 <= N; ++n0) {
            double lo = 0.0;
            for (std::size_t l = 0; l < n0; ++l) lo = std::max(lo, p[l]);
            double hi = std::numeric_limits<double>::infinity();
            for (std::size_t m = n0 + 1; m <= N; ++m) hi = std::min(hi, p[m]);
            const bool nonempty = lo < hi && lo < top;   // meets [0, top]
            if (!nonempty) continue;
            INFO("n0=" << n0);
            const bool adjacent = tset.count(n0) != 0 ||
                                  (n0 >= 1 && tset.count(n0 - 1) != 0);
            CHECK(adjacent);
        }
    };

    // Exhaustive: origin walks with steps +1/-1 and +1/-2, length <= 10.
    for (const std::vector<double>& steps :
         {std::vector<double>{1.0, -1.0}, std::vector<double>{1.0, -2.0}}) {
        for (std::size_t len = 1; len <= 10; ++len) {
            for_each_path(steps, len, [&](const Path& incr) {
                Path p(1, 0.0);
                for (double d : incr) {
                    const double nxt = p.back() + d;
                    if (nxt < 0.0) return;   // stay on the half-line
                    p.push_back(nxt);
                }
                check_adjacency(p);
            });
        }
    }

    Rng seeds(778);
    for (int rep = 0; rep < 40; ++rep) {
        check_adjacency(simulate(BdLamperti(2.0), 0.0, 400, seeds.next()).x);
        check_adjacency(simulate(SsrwNorm(3), 0.0, 400, seeds.next()).x);
    }
}

TEST_CASE("confirmation statuses flip at the escape window") {
    Path p;
    for (int n = 0; n <= 10; ++n) p.push_back(static_cast<double>(n));
    const Trajectory t = make_traj(p);
    const double W = 3.0;

    for (const auto& cp : detect_cutpoints(t, W)) {
        const bool expect_confirmed = 10.0 >= cp.x + W;
        CHECK((cp.status == Status::confirmed) == expect_confirmed);
    }
    // Boundary: x = 7 has top == x + W exactly, so it counts as confirmed.
    const auto cps = detect_cutpoints(t, W);
    REQUIRE(cps.size() == 11);
    CHECK(cps[7].status == Status::confirmed);
    CHECK(cps[8].status == Status::candidate);

    const auto sep = detect_separating_set(t, W);
    CHECK(sep.candidate_measure == Catch::Approx(10.0));
    CHECK(sep.confirmed_measure == Catch::Approx(7.0));

    for (const auto& iv : detect_cut_intervals(t, 1.0, 1, W))
        CHECK((iv.status == Status::confirmed) == (10.0 >= iv.r + W));
}

TEST_CASE("windowed measures never exceed their candidate versions") {
    Rng seeds(779);
    for (int rep = 0; rep < 20; ++rep) {
        const Trajectory t = simulate(BdLamperti(2.0), 0.0, 500, seeds.next());
        for (double W : {0.0, 2.0, 5.0, 20.0}) {
            const auto sep = detect_separating_set(t, W);
            CHECK(sep.confirmed_measure <= sep.candidate_measure + 1e-12);
            std::size_t conf_points = 0, conf_times = 0;
            const auto cps = detect_cutpoints(t, W);
            for (const auto& cp : cps) conf_points += cp.status == Status::confirmed;
            const auto cts = detect_cut_times(t, W);
            for (const auto& ct : cts) conf_times += ct.status == Status::confirmed;
            CHECK(conf_points <= cps.size());
            CHECK(conf_times <= cts.size());
        }
    }
}

TEST_CASE("annulus detector matches the definition scan on lattice walks") {
    // Horizon kept modest: the reference interval scan is deliberately
    // quadratic in distinct path values.
    Rng seeds(780);
    for (int rep = 0; rep < 15; ++rep) {
        const VectorTrajectory vt =
            simulate(SsrwVector(3), {0.0, 0.0, 0.0}, 250, seeds.next());
        const Path norms = vt.norms().x;
        for (double h : {0.5, 1.0})
            for (std::size_t k : {std::size_t{1}, std::size_t{2}}) {
                const auto got = detect_cut_annuli(vt, h, k, 0.0);
                const auto want = oracle::cut_annuli(norms, h, k);
                REQUIRE(got.size() == want.size());
                for (std::size_t i = 0; i < got.size(); ++i) {
                    CHECK(got[i].l == want[i].l);
                    CHECK(got[i].r == want[i].r);
                    CHECK(got[i].entry == want[i].entry);
                    CHECK(got[i].inside == want[i].inside);
                }
            }
    }
}

TEST_CASE("annulus refinements hold whenever the norm interval exists") {
    // The detector throws if a norm cut interval fails the annulus shape;
    // on genuine lattice paths that must never happen.
    Rng seeds(781);
    for (int rep = 0; rep < 25; ++rep) {
        const VectorTrajectory vt =
            simulate(SsrwVector(2), {0.0, 0.0}, 2000, seeds.next());
        CHECK_NOTHROW(detect_cut_annuli(vt, 1.0, 1, 0.0));
    }
    VectorTrajectory flat;
    flat.dim = 1;
    flat.flat = {0.0, 1.0};
    CHECK_THROWS_AS(detect_cut_annuli(flat, 1.0, 1, 0.0), std::invalid_argument);
}

TEST_CASE("climb-event scan matches the definition") {
    struct Config {
        double eps;
        std::size_t ell;
        double h;
        std::size_t k;
    };
    // The first config fires often (two steep steps suffice); the second is
    // rare. Both must agree with the definition either way.
    const std::vector<Config> configs = {{0.9, 2, 1.0, 1}, {0.5, 5, 1.0, 2}};
    Rng seeds(782);
    for (int rep = 0; rep < 40; ++rep) {
        const Trajectory t = simulate(BdLamperti(2.0), 0.0, 800, seeds.next());
        const std::vector<double> grid = {2.5, 5.0, 9.5, 14.0, 20.0};
        for (const Config& c : configs) {
            const auto scan =
                detect_Ax_events(t, c.eps, c.ell, 0, grid, 0.0, c.h, c.k, 1.0);
            REQUIRE(scan.flags.size() == grid.size());
            CHECK(scan.q ==
                  std::max(1.0, 2.0 * static_cast<double>(c.ell) * c.eps));
            for (std::size_t i = 0; i < grid.size(); ++i) {
                CHECK(scan.flags[i].x == grid[i]);
                CHECK(scan.flags[i].occurred ==
                      oracle::ax_event(t.x, 0, grid[i], c.eps, c.ell));
            }
        }
    }
}

TEST_CASE("a flagged climb event certifies a cut interval") {
    // ell*eps > max(h, B*k) makes the climb wide enough that the strip above
    // x contains a detected (h,k) interval reaching past x + ell*eps.
    Rng seeds(783);
    const double eps = 0.9, h = 1.0, B = 1.0;
    const std::size_t ell = 2, k = 1;
    const double le = static_cast<double>(ell) * eps;
    int flagged = 0;
    for (int rep = 0; rep < 120 && flagged < 40; ++rep) {
        const Trajectory t = simulate(BdLamperti(6.0, std::nullopt, 3.0), 0.0,
                                      600, seeds.next());
        const std::vector<double> grid = {3.5, 6.0, 10.5};
        const auto scan = detect_Ax_events(t, eps, ell, 0, grid, 0.0, h, k, B);
        const auto intervals = detect_cut_intervals(t, h, k, 0.0);
        for (const auto& flag : scan.flags) {
            if (!flag.occurred) continue;
            ++flagged;
            bool certified = false;
            for (const auto& iv : intervals)
                certified = certified ||
                            (iv.l <= flag.x && iv.r >= flag.x + le &&
                             iv.k_obs >= k);
            CHECK(certified);
        }
    }
    // Make sure the property was actually exercised.
    CHECK(flagged >= 10);
}

TEST_CASE("climb-event scan rejects unusable parameters") {
    const Trajectory t = simulate(BdLamperti(2.0), 0.0, 100, 1);
    const std::vector<double> grid = {10.0};
    CHECK_THROWS_AS(detect_Ax_events(t, 0.0, 5, 0, grid, 0.0, 1.0, 2, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(detect_Ax_events(t, 0.5, 0, 0, grid, 0.0, 1.0, 2, 1.0),
                    std::invalid_argument);
    // ell*eps must exceed max(h, B*k): 5*0.5 = 2.5, B*k = 3 here.
    CHECK_THROWS_WITH(detect_Ax_events(t, 0.5, 5, 0, grid, 0.0, 1.0, 3, 1.0),
                      Catch::Matchers::ContainsSubstring("ell*eps"));
    // Grid at or below X_0 + B*n carries no certificate.
    CHECK_THROWS_WITH(detect_Ax_events(t, 0.5, 5, 4, {3.0}, 0.0, 1.0, 2, 1.0),
                      Catch::Matchers::ContainsSubstring("grid value"));
    CHECK_THROWS_WITH(detect_Ax_events(t, 0.5, 5, 101, grid, 0.0, 1.0, 2, 1.0),
                      Catch::Matchers::ContainsSubstring("horizon"));
    CHECK_THROWS_AS(detect_Ax_events(t, 0.5, 5, 0, grid, -1.0, 1.0, 2, 1.0),
                    std::invalid_argument);
}

TEST_CASE("detectors validate their window and shape parameters") {
    const Trajectory t = make_traj({0.0, 1.0, 2.0});
    CHECK_THROWS_AS(detect_cutpoints(t, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(detect_cut_times(t, -0.5), std::invalid_argument);
    CHECK_THROWS_AS(detect_separating_set(t, -2.0), std::invalid_argument);
    CHECK_THROWS_AS(detect_cut_intervals(t, 0.0, 1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(detect_cut_intervals(t, -1.0, 1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(detect_cut_intervals(t, 1.0, 1, -1.0), std::invalid_argument);
}

TEST_CASE("empty and single-point paths behave") {
    Trajectory empty;
    CHECK(detect_cutpoints(empty, 0.0).empty());
    CHECK(detect_cut_times(empty, 0.0).empty());
    CHECK(detect_separating_set(empty, 0.0).intervals.empty());
    CHECK(detect_cut_intervals(empty, 1.0, 1, 0.0).empty());

    const Trajectory one = make_traj({5.0});
    const auto cps = detect_cutpoints(one, 0.0);
    REQUIRE(cps.size() == 1);
    CHECK(cps[0].x == 5.0);
    CHECK(cps[0].n0 == 0);
    CHECK(cps[0].strong);
    CHECK(detect_cut_times(one, 0.0).empty());
}

TEST_CASE("aggregate report and serializers") {
    const Trajectory t = make_traj({0.0, 1.0, 2.0, 3.0});
    const CutReport r = analyze(t, 1.0);
    CHECK(r.horizon == 3);
    CHECK(r.window == 1.0);
    CHECK(r.cutpoints.size() == detect_cutpoints(t, 1.0).size());
    CHECK(r.cut_times.size() == detect_cut_times(t, 1.0).size());
    CHECK(r.strong_count() == 4);

    const auto j = to_json(r);
    CHECK(j["horizon"] == 3);
    CHECK(j["cutpoints"].size() == r.cutpoints.size());
    CHECK(j["strong_cutpoints"].size() == r.strong_count());
    CHECK(j["cut_times"].size() == r.cut_times.size());
    CHECK(j["separating_set"]["candidate_measure"].get<double>() ==
          Catch::Approx(r.separating.candidate_measure));
    for (const auto& iv : j["separating_set"]["intervals"])
        CHECK(iv["hi"].get<double>() <= r.separating.path_max);

    const std::string path = "cut_report_test.csv";
    write_cut_report_csv(r, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "x,n0,strong,status");
    std::size_t lines = 0;
    for (std::string line; std::getline(in, line);) ++lines;
    CHECK(lines == r.cutpoints.size());
    in.close();
    std::remove(path.c_str());
}
