#include "poissonloc/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "poissonloc/stats.hpp"

#include <json.hpp>

namespace poissonloc {

using nlohmann::json;

namespace {

void require_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (key == k) ok = true;
        if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

double require_number(const json& obj, const std::string& where, const char* key) {
    if (!obj.contains(key)) throw ConfigError(where + "." + key + ": missing");
    if (!obj[key].is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return obj[key].get<double>();
}

SignalForm parse_form(const json& j) {
    if (!j.is_object() || !j.contains("type"))
        throw ConfigError("signal.form: expected an object with a 'type' key");
    const std::string type = j["type"].get<std::string>();
    if (type == "constant") {
        require_keys(j, "signal.form", {"type", "lambda1"});
        return ConstantForm{require_number(j, "signal.form", "lambda1")};
    }
    if (type == "tabulated") {
        require_keys(j, "signal.form", {"type", "knots", "csv"});
        if (j.contains("csv")) return load_tabulated_csv(j["csv"].get<std::string>());
        if (!j.contains("knots") || !j["knots"].is_array())
            throw ConfigError("signal.form.knots: expected an array of [time, value] pairs");
        TabulatedForm tab;
        for (const auto& knot : j["knots"]) {
            if (!knot.is_array() || knot.size() != 2)
                throw ConfigError("signal.form.knots: each knot is [time, value]");
            tab.times.push_back(knot[0].get<double>());
            tab.values.push_back(knot[1].get<double>());
        }
        return tab;
    }
    throw ConfigError("signal.form.type: expected 'constant' or 'tabulated'");
}

json form_to_json(const SignalForm& form) {
    if (const auto* c = std::get_if<ConstantForm>(&form))
        return {{"type", "constant"}, {"lambda1", c->lambda1}};
    const auto& tab = std::get<TabulatedForm>(form);
    json knots = json::array();
    for (std::size_t i = 0; i < tab.times.size(); ++i)
        knots.push_back({tab.times[i], tab.values[i]});
    return {{"type", "tabulated"}, {"knots", knots}};
}

EstimatorKind parse_estimator(const std::string& name) {
    if (name == "BE") return EstimatorKind::BE;
    if (name == "MLE") return EstimatorKind::MLE;
    if (name == "TRILAT") return EstimatorKind::TRILAT;
    throw ConfigError("estimators: unknown kind '" + name + "'");
}

}  // namespace

Prior PriorSpec::make(const ParameterRectangle& box) const {
    if (is_uniform() && c0 > 0.0) return Prior::uniform();
    for (double x : {box.alpha1, box.alpha2})
        for (double y : {box.beta1, box.beta2})
            if (!(c0 + cx * x + cy * y > 0.0))
                throw ConfigError("prior: affine density not positive on Theta corners");
    const double a = c0, bx = cx, by = cy;
    return Prior::density([a, bx, by](PlanePoint p) { return a + bx * p.x + by * p.y; });
}

void ExperimentConfig::validate() const {
    if (n_sweep.empty()) throw ConfigError("n_sweep: must be nonempty");
    for (std::size_t i = 0; i < n_sweep.size(); ++i) {
        if (!(n_sweep[i] > 0.0)) throw ConfigError("n_sweep: scales must be > 0");
        if (i > 0 && n_sweep[i] <= n_sweep[i - 1])
            throw ConfigError("n_sweep: scales must be strictly ascending");
    }
    if (replications < 1) throw ConfigError("replications: must be >= 1");
    if (estimators.empty()) throw ConfigError("estimators: must request at least one estimator");
    if (!geometry.theta_box.contains(theta0)) throw ConfigError("theta0: outside theta_box");
    if (geometry.excluded(theta0)) throw ConfigError("theta0: inside an exclusion ball");
    for (std::size_t j = 0; j < geometry.size(); ++j) {
        const double tau = delay(geometry, j, theta0);
        if (!(tau > 0.0 && tau < geometry.horizon))
            throw ConfigError("geometry: delay from theta0 to sensor " + std::to_string(j) +
                              " outside (0, horizon)");
    }
    prior.make(geometry.theta_box);  // positivity check
}

ExperimentConfig default_config() {
    const double r = 8.5;
    const double a = 5.0 * std::numbers::pi / 4.0;
    SensorArray geometry({{r, 0.0}, {0.0, r}, {r * std::cos(a), r * std::sin(a)}},
                         /*nu=*/1.0, /*epsilon=*/0.1,
                         ParameterRectangle{-1.0, 1.0, -1.0, 1.0}, /*horizon=*/10.0);
    SignalModel signal(1.0, ConstantForm{2.0});
    ExperimentConfig config{std::move(geometry), std::move(signal), PlanePoint{0.0, 0.0},
                            {1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0},
                            200,
                            {EstimatorKind::BE, EstimatorKind::MLE},
                            PriorSpec{},
                            12345,
                            "."};
    return config;
}

ExperimentConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON (") + e.what() + ")");
    }
    require_keys(root, "config",
                 {"geometry", "signal", "theta0", "n_sweep", "replications", "estimators",
                  "prior", "seed", "output_dir"});
    if (!root.contains("geometry")) throw ConfigError("geometry: missing");
    if (!root.contains("signal")) throw ConfigError("signal: missing");

    const json& g = root["geometry"];
    require_keys(g, "geometry", {"sensors", "nu", "epsilon", "theta_box", "horizon"});
    if (!g.contains("sensors") || !g["sensors"].is_array() || g["sensors"].size() < 3)
        throw ConfigError("geometry.sensors: expected an array of at least 3 [x, y] pairs");
    std::vector<PlanePoint> sensors;
    for (const auto& s : g["sensors"]) {
        if (!s.is_array() || s.size() != 2)
            throw ConfigError("geometry.sensors: each sensor is [x, y]");
        sensors.push_back({s[0].get<double>(), s[1].get<double>()});
    }
    if (!g.contains("theta_box") || !g["theta_box"].is_array() || g["theta_box"].size() != 4)
        throw ConfigError("geometry.theta_box: expected [alpha1, alpha2, beta1, beta2]");
    const ParameterRectangle box{g["theta_box"][0].get<double>(), g["theta_box"][1].get<double>(),
                                 g["theta_box"][2].get<double>(), g["theta_box"][3].get<double>()};
    SensorArray geometry(std::move(sensors), require_number(g, "geometry", "nu"),
                         require_number(g, "geometry", "epsilon"), box,
                         require_number(g, "geometry", "horizon"));

    const json& s = root["signal"];
    require_keys(s, "signal", {"lambda0", "form"});
    if (!s.contains("form")) throw ConfigError("signal.form: missing");
    SignalModel signal(require_number(s, "signal", "lambda0"), parse_form(s["form"]));

    ExperimentConfig config{std::move(geometry), std::move(signal), PlanePoint{0.0, 0.0},
                            {}, 1, {}, PriorSpec{}, 0, "."};

    if (!root.contains("theta0") || !root["theta0"].is_array() || root["theta0"].size() != 2)
        throw ConfigError("theta0: expected [x, y]");
    config.theta0 = {root["theta0"][0].get<double>(), root["theta0"][1].get<double>()};

    if (!root.contains("n_sweep") || !root["n_sweep"].is_array())
        throw ConfigError("n_sweep: expected an array of scales");
    for (const auto& n : root["n_sweep"]) config.n_sweep.push_back(n.get<double>());

    if (!root.contains("replications") || !root["replications"].is_number_unsigned())
        throw ConfigError("replications: expected a positive integer");
    config.replications = root["replications"].get<std::size_t>();

    if (!root.contains("estimators") || !root["estimators"].is_array())
        throw ConfigError("estimators: expected an array of kinds");
    for (const auto& e : root["estimators"])
        config.estimators.push_back(parse_estimator(e.get<std::string>()));

    if (root.contains("prior")) {
        const json& p = root["prior"];
        require_keys(p, "prior", {"type", "c0", "cx", "cy"});
        const std::string type = p.value("type", std::string("uniform"));
        if (type == "uniform") {
            config.prior = PriorSpec{};
        } else if (type == "affine") {
            config.prior = PriorSpec{p.value("c0", 1.0), p.value("cx", 0.0), p.value("cy", 0.0)};
        } else {
            throw ConfigError("prior.type: expected 'uniform' or 'affine'");
        }
    }
    if (root.contains("seed")) {
        if (!root["seed"].is_number_unsigned())
            throw ConfigError("seed: expected an unsigned integer");
        config.seed = root["seed"].get<std::uint64_t>();
    }
    if (root.contains("output_dir")) config.output_dir = root["output_dir"].get<std::string>();

    config.validate();
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& config) {
    json g;
    g["sensors"] = json::array();
    for (const auto& s : config.geometry.sensors) g["sensors"].push_back({s.x, s.y});
    g["nu"] = config.geometry.nu;
    g["epsilon"] = config.geometry.epsilon;
    g["theta_box"] = {config.geometry.theta_box.alpha1, config.geometry.theta_box.alpha2,
                      config.geometry.theta_box.beta1, config.geometry.theta_box.beta2};
    g["horizon"] = config.geometry.horizon;
    json root;
    root["geometry"] = g;
    root["signal"] = {{"lambda0", config.signal.lambda0}, {"form", form_to_json(config.signal.form)}};
    root["theta0"] = {config.theta0.x, config.theta0.y};
    root["n_sweep"] = config.n_sweep;
    root["replications"] = config.replications;
    root["estimators"] = json::array();
    for (auto kind : config.estimators) root["estimators"].push_back(to_string(kind));
    if (config.prior.is_uniform())
        root["prior"] = {{"type", "uniform"}};
    else
        root["prior"] = {{"type", "affine"},
                         {"c0", config.prior.c0},
                         {"cx", config.prior.cx},
                         {"cy", config.prior.cy}};
    root["seed"] = config.seed;
    root["output_dir"] = config.output_dir;
    return root.dump(2);
}

namespace {

SignalModel scaled_model(const SignalModel& base, double n) {
    return SignalModel(base.lambda0, base.form, n);
}

// Trial index -> simulation stream label; one label per (n index, rep).
std::uint64_t trial_label(std::size_t n_index, std::size_t rep, std::size_t reps) {
    return static_cast<std::uint64_t>(n_index) * reps + rep;
}

std::vector<TrialResult> run_one_trial(const ExperimentConfig& config, std::size_t n_index,
                                       std::size_t rep) {
    const double n = config.n_sweep[n_index];
    const SignalModel model = scaled_model(config.signal, n);
    const SimulationSeed seed{config.seed,
                              trial_label(n_index, rep, config.replications)};
    const auto records = sample_events(model, config.geometry, config.theta0, seed);
    const Prior prior = config.prior.make(config.geometry.theta_box);
    std::vector<TrialResult> rows;
    rows.reserve(config.estimators.size());
    for (EstimatorKind kind : config.estimators) {
        const auto start = std::chrono::steady_clock::now();
        PlanePoint estimate{};
        switch (kind) {
            case EstimatorKind::BE:
                estimate = bayes_estimate(model, config.geometry, records, prior).estimate;
                break;
            case EstimatorKind::MLE:
                estimate = mle_estimate(model, config.geometry, records).estimate;
                break;
            case EstimatorKind::TRILAT: {
                std::vector<double> taus;
                taus.reserve(records.size());
                for (const auto& rec : records) taus.push_back(estimate_arrival(model, rec));
                estimate = trilaterate(config.geometry, taus).estimate;
                break;
            }
        }
        const auto stop = std::chrono::steady_clock::now();
        const double wall =
            std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(stop - start)
                .count();
        rows.push_back({n, rep, kind, estimate, distance(estimate, config.theta0), wall});
    }
    return rows;
}

}  // namespace

std::vector<TrialResult> run_error_curve(const ExperimentConfig& config, unsigned jobs) {
    config.validate();
    const std::size_t trials = config.n_sweep.size() * config.replications;
    std::vector<std::vector<TrialResult>> per_trial(trials);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= trials) return;
            per_trial[t] =
                run_one_trial(config, t / config.replications, t % config.replications);
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < jobs; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    std::vector<TrialResult> rows;
    rows.reserve(trials * config.estimators.size());
    for (auto& trial : per_trial)
        for (auto& row : trial) rows.push_back(row);
    return rows;
}

void write_results_csv(const std::string& path, std::span<const TrialResult> rows) {
    std::ofstream out(path);
    if (!out) throw IoError("write_results_csv: cannot open " + path);
    out << "n,rep,estimator,x,y,error,wall_ms\n";
    char buf[224];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%zu,%s,%.17g,%.17g,%.17g,%.6f\n", r.n,
                      r.replication, to_string(r.kind).c_str(), r.estimate.x, r.estimate.y,
                      r.error, r.wall_ms);
        out << buf;
    }
    if (!out) throw IoError("write_results_csv: write failed for " + path);
}

ConvergenceReport run_convergence_check(const ExperimentConfig& config, std::size_t limit_reps,
                                        unsigned jobs) {
    config.validate();
    bool has_be = false;
    for (auto kind : config.estimators) has_be |= kind == EstimatorKind::BE;
    if (!has_be) throw ConfigError("estimators: convergence check requires BE");

    ExperimentConfig be_only = config;
    be_only.estimators = {EstimatorKind::BE};
    const auto rows = run_error_curve(be_only, jobs);
    return convergence_from_rows(config, rows, limit_reps, jobs);
}

ConvergenceReport convergence_from_rows(const ExperimentConfig& config,
                                        std::span<const TrialResult> rows,
                                        std::size_t limit_reps, unsigned jobs) {
    ConvergenceReport report{};
    std::vector<double> last_x, last_y, last_r;
    const double n_last = config.n_sweep.back();
    for (std::size_t i = 0; i < config.n_sweep.size(); ++i) {
        const double n = config.n_sweep[i];
        std::vector<double> errors, sq;
        for (const auto& r : rows)
            if (r.n == n && r.kind == EstimatorKind::BE) {
                errors.push_back(r.error);
                sq.push_back(r.error * r.error);
                if (n == n_last) {
                    last_x.push_back(n * (r.estimate.x - config.theta0.x));
                    last_y.push_back(n * (r.estimate.y - config.theta0.y));
                    last_r.push_back(n * r.error);
                }
            }
        if (errors.size() < 2)
            throw InsufficientReplications("convergence check: fewer than 2 BE rows at n=" +
                                           std::to_string(n));
        const double mse = stats::mean(sq);
        const double mse_se = std::sqrt(stats::variance(sq) / static_cast<double>(sq.size()));
        report.per_n.push_back({n, stats::mean(errors), mse, n * n * mse, n * n * mse_se});
        if (n * n * mse_se > 0.2 * n * n * mse)
            throw InsufficientReplications("n=" + std::to_string(n) +
                                           ": standard error above 20% of n^2 MSE");
    }

    // One batch of zeta draws backs both the risk bound and the
    // distributional comparison.
    const LimitModel limit = limit_model_for(config.signal, config.geometry, config.theta0);
    std::vector<double> zeta_x(limit_reps), zeta_y(limit_reps), zeta_r(limit_reps),
        zeta_sq(limit_reps);
    {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= limit_reps) return;
                const ZetaSample z = sample_zeta(limit, SimulationSeed{mix64(config.seed), i});
                zeta_x[i] = z.zeta.x;
                zeta_y[i] = z.zeta.y;
                zeta_r[i] = norm(z.zeta);
                zeta_sq[i] = zeta_r[i] * zeta_r[i];
            }
        };
        if (jobs <= 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }
    }
    report.bound = {stats::mean(zeta_sq),
                    std::sqrt(stats::variance(zeta_sq) / static_cast<double>(limit_reps)),
                    limit_reps};
    if (report.bound.std_error > 0.2 * report.bound.value)
        throw InsufficientReplications("efficiency bound: standard error above 20%");

    const std::size_t m = report.per_n.size();
    report.ratio_last_two =
        m >= 2 ? report.per_n[m - 2].n2_mse / report.per_n[m - 1].n2_mse : 1.0;
    report.efficiency_ratio = report.per_n[m - 1].n2_mse / report.bound.value;
    report.marginal_ks_x = stats::ks_two_sample(last_x, zeta_x);
    report.marginal_ks_y = stats::ks_two_sample(last_y, zeta_y);
    report.radial_ks = stats::ks_two_sample(last_r, zeta_r);
    report.rate_ok = report.ratio_last_two >= 0.6 && report.ratio_last_two <= 1.6;
    report.efficiency_ok = report.efficiency_ratio >= 0.75 && report.efficiency_ratio <= 1.25;
    return report;
}

std::string ConvergenceReport::to_json() const {
    json root;
    root["per_n"] = json::array();
    for (const auto& p : per_n)
        root["per_n"].push_back({{"n", p.n},
                                 {"mean_error", p.mean_error},
                                 {"mse", p.mse},
                                 {"n2_mse", p.n2_mse},
                                 {"n2_mse_se", p.n2_mse_se}});
    root["efficiency_bound"] = {{"value", bound.value},
                                {"std_error", bound.std_error},
                                {"reps", bound.reps}};
    root["ratio_last_two"] = ratio_last_two;
    root["efficiency_ratio"] = efficiency_ratio;
    root["marginal_ks_x"] = marginal_ks_x;
    root["marginal_ks_y"] = marginal_ks_y;
    root["radial_ks"] = radial_ks;
    root["rate_ok"] = rate_ok;
    root["efficiency_ok"] = efficiency_ok;
    return root.dump(2);
}

}  // namespace poissonloc
