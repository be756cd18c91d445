// Command-line front end: simulate walks, run the cut-structure detectors,
// estimate hitting probabilities, drive batch experiments, and classify
// generators by their moment profiles. Outputs are CSV tables plus JSON
// manifests; every run echoes its configuration and seed so results can be
// reproduced byte for byte.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cutl/cutl.hpp"

using nlohmann::json;

namespace {

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    return json::parse(in);
}

// A generator spec may arrive inline (--generator '{"family":...}') or as a
// config file that either is the spec or wraps it under "generator".
json generator_spec(const std::string& inline_json,
                    const std::string& config_path) {
    if (!inline_json.empty()) return json::parse(inline_json);
    if (!config_path.empty()) {
        json j = load_json_file(config_path);
        return j.contains("generator") ? j.at("generator") : j;
    }
    throw std::runtime_error("need --generator or --config");
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
}

struct SimulateOpts {
    std::string generator, config, out, csv;
    std::size_t steps = 1'000'000;
    double start = 0.0;
    std::uint64_t seed = 1;
};

void run_simulate(const SimulateOpts& o) {
    const json gen = generator_spec(o.generator, o.config);
    if (o.out.empty() && o.csv.empty())
        throw std::runtime_error("simulate: need --out and/or --csv");
    if (cutl::is_vector_family(gen)) {
        auto spec = cutl::make_vector_process(gen);
        const std::vector<double> origin(spec->dim(), 0.0);
        const auto traj = cutl::simulate(*spec, origin, o.steps, o.seed);
        if (!o.out.empty()) cutl::write_cutl(traj, o.out);
        if (!o.csv.empty()) cutl::write_csv(traj, o.csv);
        const auto norms = traj.norms();
        std::cout << spec->id() << ": " << o.steps << " steps, final |X| = "
                  << norms.x.back() << ", max |X| = " << norms.max() << '\n';
    } else {
        auto spec = cutl::make_scalar_process(gen);
        const auto traj = cutl::simulate(*spec, o.start, o.steps, o.seed);
        if (!o.out.empty()) cutl::write_cutl(traj, o.out);
        if (!o.csv.empty()) cutl::write_csv(traj, o.csv);
        std::cout << spec->id() << ": " << o.steps << " steps, final X = "
                  << traj.x.back() << ", max X = " << traj.max() << '\n';
    }
}

struct DetectOpts {
    std::string in, out_json, out_csv;
    double window = 50.0;
    double h = 1.0;
    std::size_t k = 1;
};

void run_detect(const DetectOpts& o) {
    bool vector_file = false;
    cutl::Trajectory traj;
    cutl::VectorTrajectory vtraj;
    try {
        traj = cutl::read_cutl_scalar(o.in);
    } catch (const std::runtime_error&) {
        vtraj = cutl::read_cutl_vector(o.in);   // rethrows if truly unreadable
        vector_file = true;
    }

    if (vector_file) {
        const auto annuli = cutl::detect_cut_annuli(vtraj, o.h, o.k, o.window);
        std::size_t confirmed = 0;
        for (const auto& a : annuli)
            confirmed += a.status == cutl::Status::confirmed ? 1 : 0;
        std::cout << "dim " << vtraj.dim << ", horizon " << vtraj.horizon()
                  << ": " << annuli.size() << " cut annuli (" << confirmed
                  << " confirmed)\n";
        if (!o.out_csv.empty()) {
            std::string csv = "l,r,entry,inside,status\n";
            for (const auto& a : annuli)
                csv += cutl::detail::fmt_double(a.l) + "," +
                       cutl::detail::fmt_double(a.r) + "," +
                       std::to_string(a.entry) + "," + std::to_string(a.inside) +
                       "," + cutl::to_string(a.status) + "\n";
            write_text(o.out_csv, csv);
        }
        if (!o.out_json.empty()) {
            json j = {{"source", o.in}, {"window", o.window},
                      {"h", o.h},       {"k", o.k},
                      {"dim", vtraj.dim}};
            auto arr = json::array();
            for (const auto& a : annuli)
                arr.push_back({{"l", a.l},
                               {"r", a.r},
                               {"entry", a.entry},
                               {"inside", a.inside},
                               {"status", cutl::to_string(a.status)}});
            j["annuli"] = arr;
            write_text(o.out_json, j.dump(2) + "\n");
        }
        return;
    }

    const auto report = cutl::analyze(traj, o.window);
    const auto intervals = cutl::detect_cut_intervals(traj, o.h, o.k, o.window);
    std::cout << "horizon " << report.horizon << ": " << report.cutpoints.size()
              << " cutpoints (" << report.strong_count() << " strong), "
              << report.cut_times.size() << " cut times, " << intervals.size()
              << " (" << o.h << "," << o.k << ") cut intervals\n";
    if (!o.out_csv.empty()) cutl::write_cut_report_csv(report, o.out_csv);
    if (!o.out_json.empty()) {
        json j = cutl::to_json(report);
        j["source"] = o.in;
        auto arr = json::array();
        for (const auto& iv : intervals)
            arr.push_back({{"l", iv.l},
                           {"r", iv.r},
                           {"k_obs", iv.k_obs},
                           {"status", cutl::to_string(iv.status)}});
        j["cut_intervals"] = arr;
        write_text(o.out_json, j.dump(2) + "\n");
    }
}

struct HitOpts {
    std::string generator, config, mode = "race", out;
    double x = 0.0, y = 0.0, start = 0.0, ycap_mult = 50.0, b = 0.0;
    std::size_t replicas = 10'000;
    std::uint64_t seed = 1;
};

void run_hit(const HitOpts& o) {
    const json gen = generator_spec(o.generator, o.config);
    auto spec = cutl::make_scalar_process(gen);

    if (o.mode == "exact" || o.mode == "series") {
        const auto* bd = dynamic_cast<const cutl::BdLamperti*>(spec.get());
        if (!bd)
            throw std::runtime_error(
                "mode " + o.mode + " needs a bd_lamperti generator");
        if (o.mode == "exact") {
            const double p = cutl::bd_exact_race(*bd, o.start, o.x, o.b);
            std::cout << "P(hit " << o.b << " before " << o.x << " | start "
                      << o.start << ") = " << p << '\n';
        } else {
            const auto s = cutl::bd_never_return_series(*bd, o.start, o.x);
            std::cout << "P(never reach " << o.x << " | start " << o.start
                      << ") = " << s.value
                      << " (series residual <= " << s.tail_fraction << ")\n";
        }
        return;
    }

    cutl::EscapeEstimate est;
    if (o.mode == "race") {
        est = cutl::mc_race(*spec, o.start, o.x, o.y, o.replicas, o.seed);
    } else if (o.mode == "targeted") {
        est = cutl::targeted_entry_probability(*spec, o.start, o.x, o.y,
                                               o.replicas, o.seed);
    } else if (o.mode == "forever") {
        est = cutl::mc_escape_forever(*spec, o.start, o.x, o.ycap_mult,
                                      o.replicas, o.seed);
    } else {
        throw std::runtime_error("unknown hit mode: " + o.mode);
    }
    std::cout << spec->id() << " " << o.mode << ": p_hat = " << est.p_hat
              << " +- " << est.half_width << " (escapes " << est.escapes
              << ", returns " << est.returns << ", truncations "
              << est.truncations << ")";
    if (o.mode == "forever") std::cout << ", bias scale " << est.bias_scale;
    std::cout << '\n';
    if (!o.out.empty())
        cutl::write_escape_csv(
            {{o.x, o.mode == "forever" ? o.ycap_mult * o.x : o.y, est}}, o.out);
}

struct ExperimentOpts {
    std::string config, out = ".";
    std::uint64_t seed = 0;
    bool has_seed = false;
};

void run_experiment(const ExperimentOpts& o) {
    const json j = load_json_file(o.config);
    const std::string name = j.at("experiment").get<std::string>();
    cutl::ExperimentConfig cfg = cutl::ExperimentConfig::from_json(j);
    if (o.has_seed) cfg.seed = o.seed;

    const auto t0 = std::chrono::steady_clock::now();
    cutl::ExperimentResult res;
    if (name == "cutpoint_growth")
        res = cutl::run_cutpoint_growth(cfg);
    else if (name == "dyadic_blocks")
        res = cutl::run_dyadic_block_stats(cfg);
    else if (name == "ax_frequency")
        res = cutl::run_Ax_frequency(cfg);
    else if (name == "annuli")
        res = cutl::run_annuli_experiment(cfg);
    else
        throw std::runtime_error("unknown experiment: " + name);
    const double wall_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - t0)
            .count();

    std::filesystem::create_directories(o.out);
    const std::string csv_path = o.out + "/" + res.name + ".csv";
    const std::string man_path = o.out + "/" + res.name + "_manifest.json";
    res.write_csv(csv_path);
    write_text(man_path, res.manifest(wall_ms).dump(2) + "\n");
    std::cout << "wrote " << csv_path << " and " << man_path << " ("
              << res.rows.size() << " rows, " << wall_ms << " ms)\n";
}

struct ClassifyOpts {
    std::string generator, config, out;
};

void run_classify(const ClassifyOpts& o) {
    const json gen = generator_spec(o.generator, o.config);
    auto spec = cutl::make_scalar_process(gen);
    const auto res = cutl::classify(spec->profile());
    const json j = {{"generator", spec->id()},
                    {"declared_tag", cutl::to_string(spec->profile().regime_tag)},
                    {"tag", cutl::to_string(res.tag)},
                    {"surplus_positive", res.surplus_positive},
                    {"drift_bounded", res.drift_bounded},
                    {"surplus_log_small", res.surplus_log_small},
                    {"surplus_beats_mu2", res.surplus_beats_mu2},
                    {"chat", {res.chat_lo, res.chat_hi}},
                    {"bhat", {res.bhat_lo, res.bhat_hi}}};
    std::cout << j.dump(2) << '\n';
    if (!o.out.empty()) write_text(o.out, j.dump(2) + "\n");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cut-structure toolkit for near-critical random walks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", cutl::kCutlVersionString);
    std::cout.precision(12);

    SimulateOpts sim;
    auto* simulate = app.add_subcommand("simulate", "sample one trajectory");
    simulate->add_option("--generator", sim.generator, "inline generator JSON");
    simulate->add_option("--config", sim.config, "config file with a generator");
    simulate->add_option("--steps", sim.steps, "number of increments");
    simulate->add_option("--start", sim.start, "scalar start state");
    simulate->add_option("--seed", sim.seed, "RNG seed");
    simulate->add_option("--out", sim.out, "binary trajectory output");
    simulate->add_option("--csv", sim.csv, "CSV trajectory output");
    simulate->callback([&sim] { run_simulate(sim); });

    DetectOpts det;
    auto* detect = app.add_subcommand("detect", "run the cut-structure detectors");
    detect->add_option("--in", det.in, "trajectory file")->required();
    detect->add_option("--window", det.window, "confirmation window W");
    detect->add_option("--hmin", det.h, "cut-interval length floor");
    detect->add_option("--kmin", det.k, "cut-interval point floor");
    detect->add_option("--json", det.out_json, "full report JSON output");
    detect->add_option("--csv", det.out_csv, "cutpoint table CSV output");
    detect->callback([&det] { run_detect(det); });

    HitOpts hit;
    auto* hitc = app.add_subcommand("hit", "hitting/escape probability estimates");
    hitc->add_option("--generator", hit.generator, "inline generator JSON");
    hitc->add_option("--config", hit.config, "config file with a generator");
    hitc->add_option("--mode", hit.mode,
                     "race | targeted | forever | exact | series");
    hitc->add_option("--x", hit.x, "lower level");
    hitc->add_option("--y", hit.y, "barrier offset (race/targeted)");
    hitc->add_option("--b", hit.b, "upper level (exact mode)");
    hitc->add_option("--start", hit.start, "start state");
    hitc->add_option("--ycap-mult", hit.ycap_mult,
                     "far-barrier multiplier (forever mode)");
    hitc->add_option("--replicas", hit.replicas, "Monte Carlo replicas");
    hitc->add_option("--seed", hit.seed, "RNG seed");
    hitc->add_option("--out", hit.out, "one-row escape CSV output");
    hitc->callback([&hit] { run_hit(hit); });

    ExperimentOpts exp;
    auto* expc = app.add_subcommand("experiment", "batch experiment from a config");
    expc->add_option("--config", exp.config, "experiment config JSON")->required();
    expc->add_option("--out", exp.out, "output directory");
    auto* seed_opt = expc->add_option("--seed", exp.seed, "override config seed");
    expc->callback([&exp, seed_opt] {
        exp.has_seed = seed_opt->count() > 0;
        run_experiment(exp);
    });

    ClassifyOpts cls;
    auto* clsc = app.add_subcommand("classify", "regime tag from moment bounds");
    clsc->add_option("--generator", cls.generator, "inline generator JSON");
    clsc->add_option("--config", cls.config, "config file with a generator");
    clsc->add_option("--out", cls.out, "JSON output file");
    clsc->callback([&cls] { run_classify(cls); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
