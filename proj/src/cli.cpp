#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "poissonloc/harness.hpp"
#include "poissonloc/stats.hpp"

#include <CLI11.hpp>
#include <json.hpp>

namespace poissonloc {

namespace {

namespace fs = std::filesystem;

struct CommonOptions {
    std::string config_path;
    std::string out_dir;
    bool out_set = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t reps = 0;
    bool reps_set = false;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--config", opt.config_path, "JSON experiment config (built-in default if omitted)");
    cmd->add_option("--out", opt.out_dir, "output directory (default: config output_dir)")
        ->each([&](const std::string&) { opt.out_set = true; });
    cmd->add_option("--seed", opt.seed, "root seed override")->each([&](const std::string&) {
        opt.seed_set = true;
    });
    cmd->add_option("--reps", opt.reps, "replication count override")->each([&](const std::string&) {
        opt.reps_set = true;
    });
    cmd->add_option("--jobs", opt.jobs, "worker threads");
}

ExperimentConfig resolve_config(const CommonOptions& opt) {
    ExperimentConfig config = opt.config_path.empty() ? default_config() : load_config(opt.config_path);
    if (opt.seed_set) config.seed = opt.seed;
    if (opt.reps_set) config.replications = opt.reps;
    config.validate();
    return config;
}

fs::path ensure_out_dir(const CommonOptions& opt, const ExperimentConfig& config) {
    fs::path dir(opt.out_set ? opt.out_dir : config.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("output directory: cannot create " + dir.string());
    return dir;
}

int cmd_simulate(const CommonOptions& opt) {
    const ExperimentConfig config = resolve_config(opt);
    const SignalModel model(config.signal.lambda0, config.signal.form, config.n_sweep.front());
    const auto records =
        sample_events(model, config.geometry, config.theta0, SimulationSeed{config.seed, 0});
    const fs::path path = ensure_out_dir(opt) / "events.csv";
    write_events_csv(path.string(), records);
    std::size_t total = 0;
    for (const auto& rec : records) total += rec.count();
    std::cout << "wrote " << total << " events to " << path.string() << "\n";
    return 0;
}

int cmd_estimate(const CommonOptions& opt, const std::string& events_path) {
    const ExperimentConfig config = resolve_config(opt);
    const SignalModel model(config.signal.lambda0, config.signal.form, config.n_sweep.front());
    const auto records = read_events_csv(events_path, config.geometry.horizon);
    const Prior prior = config.prior.make(config.geometry.theta_box);
    nlohmann::json out;
    out["n"] = config.n_sweep.front();
    out["estimates"] = nlohmann::json::array();
    for (EstimatorKind kind : config.estimators) {
        EstimateResult result{};
        switch (kind) {
            case EstimatorKind::BE:
                result = bayes_estimate(model, config.geometry, records, prior);
                break;
            case EstimatorKind::MLE:
                result = mle_estimate(model, config.geometry, records);
                break;
            case EstimatorKind::TRILAT: {
                std::vector<double> taus;
                for (const auto& rec : records) taus.push_back(estimate_arrival(model, rec));
                result = trilaterate(config.geometry, taus);
                break;
            }
        }
        out["estimates"].push_back({{"estimator", to_string(kind)},
                                    {"x", result.estimate.x},
                                    {"y", result.estimate.y}});
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_experiment(const CommonOptions& opt) {
    const ExperimentConfig config = resolve_config(opt);
    const auto rows = run_error_curve(config, opt.jobs);
    const fs::path dir = ensure_out_dir(opt);
    write_results_csv((dir / "results.csv").string(), rows);

    nlohmann::json summary;
    bool has_be = false;
    for (auto kind : config.estimators) has_be |= kind == EstimatorKind::BE;
    if (has_be && config.replications >= 50) {
        const ConvergenceReport report = convergence_from_rows(config, rows, 2000, opt.jobs);
        summary = nlohmann::json::parse(report.to_json());
    } else {
        summary["note"] = "convergence summary needs BE and at least 50 replications";
    }
    for (EstimatorKind kind : config.estimators) {
        nlohmann::json per_n = nlohmann::json::array();
        for (double n : config.n_sweep) {
            std::vector<double> errors;
            for (const auto& r : rows)
                if (r.n == n && r.kind == kind) errors.push_back(r.error);
            per_n.push_back({{"n", n},
                             {"median_error", stats::median(errors)},
                             {"mean_error", stats::mean(errors)}});
        }
        summary["errors"][to_string(kind)] = per_n;
    }
    std::ofstream out(dir / "summary.json");
    if (!out) throw IoError("experiment: cannot open summary.json");
    out << summary.dump(2) << "\n";
    std::cout << "wrote " << rows.size() << " rows to " << (dir / "results.csv").string() << "\n";
    return 0;
}

int cmd_limit(const CommonOptions& opt) {
    const ExperimentConfig config = resolve_config(opt);
    const std::size_t reps = opt.reps_set ? opt.reps : 1000;
    if (reps < 100) throw ConfigError("--reps: limit sampling needs at least 100 draws");
    const LimitModel limit = limit_model_for(config.signal, config.geometry, config.theta0);
    const std::uint64_t root = opt.seed_set ? opt.seed : mix64(config.seed);
    std::vector<ZetaSample> samples(reps);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= reps) return;
            samples[i] = sample_zeta(limit, SimulationSeed{root, i});
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::max(1u, opt.jobs); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    const fs::path dir = ensure_out_dir(opt);
    write_zeta_csv((dir / "zeta.csv").string(), samples);
    std::vector<double> sq(reps);
    for (std::size_t i = 0; i < reps; ++i)
        sq[i] = samples[i].zeta.x * samples[i].zeta.x + samples[i].zeta.y * samples[i].zeta.y;
    const double mean = stats::mean(sq);
    const double se = std::sqrt(stats::variance(sq) / static_cast<double>(reps));
    nlohmann::json out = {{"efficiency_bound", mean},
                          {"std_error", se},
                          {"reps", reps},
                          {"truncation", limit.truncation},
                          {"resolution", limit.resolution}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_check(const CommonOptions& opt) {
    const ExperimentConfig config = resolve_config(opt);
    const ValidationReport report = validate_identifiability(config.geometry, config.signal);
    std::cout << report.summary();
    return report.all_passed() ? 0 : 1;
}

}  // namespace

int cli(const std::vector<std::string>& argv) {
    CLI::App app{"Poisson source localization from change-point event streams"};
    app.require_subcommand(1);

    CommonOptions opt;
    std::string events_path;

    CLI::App* sim = app.add_subcommand("simulate", "draw event records, write events.csv");
    add_common(sim, opt);
    CLI::App* est = app.add_subcommand("estimate", "estimate the source from an event CSV");
    add_common(est, opt);
    est->add_option("events", events_path, "event CSV produced by simulate")->required();
    CLI::App* exp = app.add_subcommand("experiment", "error-decay experiment (results.csv + summary.json)");
    add_common(exp, opt);
    CLI::App* lim = app.add_subcommand("limit", "limit-process sampling and the risk bound");
    add_common(lim, opt);
    CLI::App* chk = app.add_subcommand("check", "validate a configuration (identifiability report)");
    add_common(chk, opt);

    std::vector<std::string> args(argv.rbegin(), argv.rend());
    if (!args.empty()) args.pop_back();  // program name
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) return cmd_simulate(opt);
        if (est->parsed()) return cmd_estimate(opt, events_path);
        if (exp->parsed()) return cmd_experiment(opt);
        if (lim->parsed()) return cmd_limit(opt);
        if (chk->parsed()) return cmd_check(opt);
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace poissonloc
