#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "poissonloc/harness.hpp"

using namespace poissonloc;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig config = default_config();
    config.n_sweep = {5.0};
    config.replications = 3;
    config.estimators = {EstimatorKind::BE};
    return config;
}

}  // namespace

TEST_CASE("default configuration is valid and round-trips through JSON") {
    const ExperimentConfig config = default_config();
    config.validate();
    const ExperimentConfig parsed = parse_config(config_to_json(config));
    CHECK(parsed.geometry.sensors[2].x == doctest::Approx(config.geometry.sensors[2].x));
    CHECK(parsed.n_sweep == config.n_sweep);
    CHECK(parsed.replications == config.replications);
    CHECK(parsed.seed == config.seed);
    CHECK(parsed.estimators.size() == config.estimators.size());
}

TEST_CASE("config errors name the offending field") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"bogus": 1})"),
                         doctest::Contains("unknown key 'bogus'"), ConfigError);
    ExperimentConfig config = default_config();
    config.replications = 0;
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("replications"), ConfigError);
    config = default_config();
    config.n_sweep = {5.0, 5.0};
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("n_sweep"), ConfigError);
    config = default_config();
    config.estimators.clear();
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("estimators"), ConfigError);
    config = default_config();
    config.theta0 = {5.0, 5.0};
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("theta0"), ConfigError);

    std::string text = config_to_json(default_config());
    text.replace(text.find("\"constant\""), 10, "\"mystery\"");
    CHECK_THROWS_AS(parse_config(text), ConfigError);
}

TEST_CASE("error curve rows are deterministic and worker-count independent") {
    const ExperimentConfig config = small_config();
    const auto serial = run_error_curve(config, 1);
    const auto parallel = run_error_curve(config, 4);
    const auto again = run_error_curve(config, 1);
    REQUIRE(serial.size() == parallel.size());
    REQUIRE(serial.size() == config.replications);
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].estimate.x == parallel[i].estimate.x);
        CHECK(serial[i].estimate.y == parallel[i].estimate.y);
        CHECK(serial[i].estimate.x == again[i].estimate.x);
        CHECK(serial[i].replication == i);
        CHECK(serial[i].error >= 0.0);
    }
}

TEST_CASE("results CSV carries the stable schema") {
    const ExperimentConfig config = small_config();
    const auto rows = run_error_curve(config, 1);
    const char* path = "results_schema_test.csv";
    write_results_csv(path, rows);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "n,rep,estimator,x,y,error,wall_ms");
    std::size_t lines = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++lines;
    CHECK(lines == rows.size());
    in.close();
    std::remove(path);
}

TEST_CASE("affine prior spec validates positivity") {
    const ExperimentConfig config = default_config();
    PriorSpec tilt{1.0, 0.5, 0.0};
    CHECK_NOTHROW(tilt.make(config.geometry.theta_box));
    PriorSpec bad{0.1, 1.0, 0.0};
    CHECK_THROWS_AS(bad.make(config.geometry.theta_box), ConfigError);
}

TEST_CASE("events written by simulate reproduce the experiment row bit-exactly") {
    namespace fs = std::filesystem;
    ExperimentConfig config = default_config();
    config.n_sweep = {5.0};
    config.replications = 1;
    config.estimators = {EstimatorKind::BE};
    const auto rows = run_error_curve(config, 1);
    REQUIRE(rows.size() == 1);

    const fs::path dir = fs::temp_directory_path() / "poissonloc_roundtrip_test";
    fs::create_directories(dir);
    const SignalModel model(config.signal.lambda0, config.signal.form, config.n_sweep[0]);
    const auto records =
        sample_events(model, config.geometry, config.theta0, SimulationSeed{config.seed, 0});
    write_events_csv((dir / "events.csv").string(), records);
    const auto loaded = read_events_csv((dir / "events.csv").string(), config.geometry.horizon);
    const auto estimate =
        bayes_estimate(model, config.geometry, loaded, config.prior.make(config.geometry.theta_box));
    CHECK(estimate.estimate.x == rows[0].estimate.x);
    CHECK(estimate.estimate.y == rows[0].estimate.y);
    fs::remove_all(dir);
}

TEST_CASE("result CSVs are identical across runs except for wall time") {
    namespace fs = std::filesystem;
    const ExperimentConfig config = small_config();
    const fs::path dir = fs::temp_directory_path() / "poissonloc_csv_det_test";
    fs::create_directories(dir);
    auto masked_lines = [&](const std::string& path, unsigned jobs) {
        write_results_csv(path, run_error_curve(config, jobs));
        std::ifstream in(path);
        std::vector<std::string> lines;
        std::string line;
        while (std::getline(in, line))
            lines.push_back(line.substr(0, line.rfind(',')));  // drop wall_ms
        return lines;
    };
    const auto a = masked_lines((dir / "a.csv").string(), 1);
    const auto b = masked_lines((dir / "b.csv").string(), 8);
    CHECK(a == b);
    fs::remove_all(dir);
}

TEST_CASE("convergence check demands enough replications") {
    ExperimentConfig config = default_config();
    config.n_sweep = {5.0};
    config.replications = 1;
    config.estimators = {EstimatorKind::BE};
    CHECK_THROWS_AS(run_convergence_check(config, 100, 1), InsufficientReplications);

    config.estimators = {EstimatorKind::MLE};
    config.replications = 4;
    CHECK_THROWS_AS(run_convergence_check(config, 100, 1), ConfigError);
}

TEST_CASE("cli subcommands cover the simulate/estimate round trip") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "poissonloc_cli_test";
    fs::remove_all(dir);

    ExperimentConfig config = default_config();
    config.n_sweep = {5.0};
    config.replications = 1;
    config.estimators = {EstimatorKind::BE};
    const fs::path config_path = dir / "config.json";
    fs::create_directories(dir);
    {
        std::ofstream out(config_path);
        out << config_to_json(config);
    }

    CHECK(cli({"poissonloc", "check", "--config", config_path.string()}) == 0);
    CHECK(cli({"poissonloc", "simulate", "--config", config_path.string(), "--out",
               dir.string()}) == 0);
    CHECK(fs::exists(dir / "events.csv"));
    CHECK(cli({"poissonloc", "estimate", "--config", config_path.string(),
               (dir / "events.csv").string()}) == 0);
    CHECK(cli({"poissonloc", "experiment", "--config", config_path.string(), "--out",
               dir.string(), "--reps", "2"}) == 0);
    CHECK(fs::exists(dir / "results.csv"));
    CHECK(fs::exists(dir / "summary.json"));

    CHECK(cli({"poissonloc", "limit", "--config", config_path.string(), "--out", dir.string(),
               "--reps", "100"}) == 0);
    CHECK(fs::exists(dir / "zeta.csv"));
    {
        std::ifstream in(dir / "zeta.csv");
        std::string header;
        std::getline(in, header);
        CHECK(header == "zeta1,zeta2,mass,tail_fraction");
    }

    CHECK(cli({"poissonloc", "estimate", "--config", config_path.string(), "missing.csv"}) == 2);
    CHECK(cli({"poissonloc", "check", "--config", "no_such_config.json"}) == 2);
    CHECK(cli({"poissonloc", "experiment", "--config", config_path.string(), "--reps", "0"}) == 1);
    CHECK(cli({"poissonloc", "frobnicate"}) == 1);
    CHECK(cli({"poissonloc", "check", "--bogus-flag"}) == 1);
    fs::remove_all(dir);
}
