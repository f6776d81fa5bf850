#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "poissonloc/estimators.hpp"
#include "poissonloc/geometry.hpp"
#include "poissonloc/limit_process.hpp"
#include "poissonloc/signal.hpp"
#include "poissonloc/simulate.hpp"

namespace poissonloc {

/// Prior specification as it appears in config files: uniform, or an affine
/// tilt c0 + cx x + cy y (checked positive on the rectangle corners).
struct PriorSpec {
    double c0 = 1.0, cx = 0.0, cy = 0.0;
    bool is_uniform() const { return cx == 0.0 && cy == 0.0; }
    Prior make(const ParameterRectangle& box) const;
};

/// Full experiment description. JSON keys mirror the field names; unknown
/// keys are configuration errors.
struct ExperimentConfig {
    SensorArray geometry;
    SignalModel signal;        // scale_n ignored; the sweep provides n
    PlanePoint theta0;         // true source position for simulation
    std::vector<double> n_sweep;
    std::size_t replications = 1;
    std::vector<EstimatorKind> estimators;
    PriorSpec prior;
    std::uint64_t seed = 0;
    std::string output_dir = ".";

    /// Field-level validation (positive ascending sweep, replications >= 1,
    /// theta0 admissible, estimator list nonempty).
    void validate() const;
};

/// The configuration used throughout the reference experiments: source at
/// the origin, three sensors 8.5 away at 0, 90 and 225 degrees,
/// lambda0 = 1, lambda1 = 2, nu = 1, T = 10, Theta = (-1,1)^2, uniform
/// prior, n in {1,2,5,10,20,50,100}, 200 replications.
ExperimentConfig default_config();

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);
std::string config_to_json(const ExperimentConfig& config);

struct TrialResult {
    double n;
    std::size_t replication;
    EstimatorKind kind;
    PlanePoint estimate;
    double error;
    double wall_ms;
};

/// Simulate + estimate for every (n, replication) pair; rows come back in
/// (n, replication, estimator) order regardless of worker count.
std::vector<TrialResult> run_error_curve(const ExperimentConfig& config, unsigned jobs = 1);

void write_results_csv(const std::string& path, std::span<const TrialResult> rows);

struct ConvergenceReport {
    struct PerN {
        double n;
        double mean_error;
        double mse;
        double n2_mse;     // n^2 * MSE, the rate-n normalized risk
        double n2_mse_se;  // Monte Carlo standard error of n2_mse
    };
    std::vector<PerN> per_n;
    EfficiencyBound bound;
    double ratio_last_two;       // n2_mse[last-1] / n2_mse[last]
    double efficiency_ratio;     // n2_mse[last] / bound.value
    double marginal_ks_x;        // n (est - theta0) components vs zeta draws
    double marginal_ks_y;
    double radial_ks;
    bool rate_ok;                // ratio_last_two in [0.6, 1.6]
    bool efficiency_ok;          // efficiency_ratio in [0.75, 1.25]
    std::string to_json() const;
};

/// Rate and efficiency checks: n^2 MSE of the Bayesian estimator across the
/// sweep against the Monte Carlo risk bound, plus the distributional
/// comparison of n(estimate - theta0) with zeta samples. Throws
/// InsufficientReplications when a standard error exceeds 20% of its point
/// estimate.
ConvergenceReport run_convergence_check(const ExperimentConfig& config, std::size_t limit_reps,
                                        unsigned jobs = 1);

/// Same report computed from already-produced rows (BE rows are selected by
/// kind).
ConvergenceReport convergence_from_rows(const ExperimentConfig& config,
                                        std::span<const TrialResult> rows,
                                        std::size_t limit_reps, unsigned jobs = 1);

/// Entry point behind the command-line tool. Subcommands: simulate,
/// estimate, experiment, limit, check. Returns 0 on success, 1 on
/// validation failure, 2 on I/O error.
int cli(const std::vector<std::string>& argv);

}  // namespace poissonloc
