#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "poissonloc/likelihood.hpp"

namespace poissonloc {

/// Prior weight over the parameter rectangle: uniform, or any positive
/// continuous density supplied as a callback (generalized Bayesian
/// estimator).
struct Prior {
    static Prior uniform();
    static Prior density(std::function<double(PlanePoint)> p);

    /// log p(theta); throws DomainError when a callback density is not
    /// strictly positive.
    double log_at(PlanePoint theta, const ParameterRectangle& box) const;

    bool is_uniform() const { return !fn_; }

private:
    std::function<double(PlanePoint)> fn_;  // empty => uniform
};

enum class EstimatorKind { BE, MLE, TRILAT };

std::string to_string(EstimatorKind kind);

struct EstimateDiagnostics {
    int refine_factor = 1;        // BE: fine cells per coarse cell and axis
    int expansion_rounds = 0;     // BE: box expansions triggered
    double log_mass = 0.0;        // BE: log of the posterior normalizer
    double boundary_mass_fraction = 0.0;  // BE: refined-box boundary ring mass
    double stage2_mass_fraction = 0.0;    // BE: mass inside the refined box
    bool right_limit_attained = false;    // MLE: max strictly on a jump locus
    double condition_number = 0.0;        // TRILAT: linear system conditioning
};

struct EstimateResult {
    PlanePoint estimate;
    EstimatorKind kind;
    EstimateDiagnostics diagnostics;
};

/// Grid sizing for the Bayesian estimator. Stage 1 scans coarse_cells^2
/// midpoint cells over the rectangle; stage 2 subdivides every coarse cell
/// of the refinement box into r x r fine cells where r is the smallest
/// integer bringing the spacing at or below 0.1 * nu / (n * lambda(0)).
/// The box collects all stage-1 cells within `log_window` of the stage-1
/// maximum; a boundary ring holding more than `boundary_tolerance` of the
/// refined mass grows the box by one coarse layer (up to `max_expansions`).
struct BayesGridPolicy {
    int coarse_cells = 101;
    double log_window = 30.0;
    double boundary_tolerance = 1e-6;
    int max_expansions = 3;
    bool single_stage = false;  // dense oracle: refine every cell, no selection
};

/// Posterior-mean estimator: ratio of midpoint-rule integrals of
/// theta * p(theta) * L(theta) and p(theta) * L(theta), accumulated in cell
/// index order with log-sum-exp normalization. Cells whose centers fall in
/// an exclusion ball carry zero weight. Throws DegenerateMass when no cell
/// carries mass.
EstimateResult bayes_estimate(const SignalModel& model, const SensorArray& array,
                              std::span<const EventRecord> records, const Prior& prior,
                              const BayesGridPolicy& policy = {});

/// Same quadrature driven by an arbitrary log-weight (used by the
/// closed-form equivalence checks; bayes_estimate forwards here).
EstimateResult bayes_from_log_weight(const SensorArray& array, double scale_n, double jump0,
                                     const std::function<double(PlanePoint)>& log_weight,
                                     const BayesGridPolicy& policy);

struct MleSearchPolicy {
    int coarse_cells = 101;
    int refine_starts = 10;
    double step_fraction = 1e-4;  // final pattern-search step: fraction of diam(Theta)
};

/// Maximum likelihood estimator: maximizes max(left, right) of the log
/// likelihood ratio over (a) the coarse midpoint grid, (b) pairwise
/// intersections of event circles ||theta_j - theta|| = nu t_{i,j} falling
/// in the rectangle, and (c) pattern-search refinement from the best
/// candidates. Ties resolve to the lexicographically smallest point.
EstimateResult mle_estimate(const SignalModel& model, const SensorArray& array,
                            std::span<const EventRecord> records,
                            const MleSearchPolicy& policy = {});

/// One-dimensional change-point MLE of the arrival time for a single
/// record: maximizes l [X(T) - X(tau)] + n lambda1 (tau - T) over (0, T],
/// attained at left limits of event times or at T; ties take the smallest
/// tau. Constant form only.
double estimate_arrival(const SignalModel& model, const EventRecord& record);

/// Two-step localization: solve tau_j^2 nu^2 = ||theta_j - theta||^2 by
/// subtracting the first equation from the others (linear least squares for
/// more than three sensors). Throws SingularGeometry when the condition
/// number exceeds 1e12.
EstimateResult trilaterate(const SensorArray& array, std::span<const double> tau_hats);

}  // namespace poissonloc
