#pragma once

#include <span>
#include <vector>

#include "poissonloc/geometry.hpp"
#include "poissonloc/simulate.hpp"

namespace poissonloc {

/// One-sided values of the log likelihood ratio at a parameter point whose
/// delays may coincide with event times. `right` counts events with
/// t == tau_j(theta) (the supremum convention: approaching the jump from
/// below in tau keeps the event in the sum); `left` drops them. The two
/// agree whenever no event sits exactly on a delay circle.
struct SidedValue {
    double left;
    double right;

    double max() const { return right; }  // right - left = l * (#exact hits) >= 0
};

/// Log likelihood ratio ln L(theta, X^n):
///   sum_j sum_{t_{i,j} > tau_j} ln(1 + lambda(t - tau_j)/lambda0)
///   - n sum_j int_{tau_j}^{T} lambda(t - tau_j) dt.
/// Sensors are matched to records through EventRecord::sensor, so a subset
/// of sensors (down to a single one) can be evaluated. Throws
/// ExclusionViolation when theta is inside an epsilon-ball.
SidedValue log_lr(const SignalModel& model, const SensorArray& array, PlanePoint theta,
                  std::span<const EventRecord> records);

/// Constant-signal closed form
///   l * sum_j [X_j(T) - X_j(tau_j)] - n lambda1 sum_j (T - tau_j),
/// same one-sided convention. Throws FormError for tabulated models.
SidedValue log_lr_constant(const SignalModel& model, const SensorArray& array, PlanePoint theta,
                           std::span<const EventRecord> records);

/// Hellinger-type distance
///   sum_j int_0^T [sqrt(lambda_{j,n}(a,t)) - sqrt(lambda_{j,n}(b,t))]^2 dt.
/// Constant form: n (sqrt(lambda0+lambda1) - sqrt(lambda0))^2 *
/// |tau_j(a) - tau_j(b)| per sensor. Tabulated form: adaptive quadrature
/// split at both change points (absolute tolerance 1e-9).
double hellinger(const SignalModel& model, const SensorArray& array, PlanePoint theta_a,
                 PlanePoint theta_b);

/// E[Z_n^{1/2}(u)] = exp(-1/2 * hellinger(theta0, theta0 + u/n)); equals 1
/// iff u = 0 and decays exponentially in ||u||.
double expected_half_lr(const SignalModel& model, const SensorArray& array, PlanePoint theta0,
                        PlanePoint u);

/// Precomputed evaluator for repeated log-likelihood queries over parameter
/// grids (sorted per-sensor event times, cached compensator pieces). The
/// grid estimators are built on top of this.
class LogLikelihoodField {
public:
    LogLikelihoodField(const SignalModel& model, const SensorArray& array,
                       std::span<const EventRecord> records);

    SidedValue at(PlanePoint theta) const;

    /// One-sided values with a snapping tolerance: events within `snap` of
    /// the delay count as exact hits (kept by `right`, dropped by `left`).
    /// The jump-locus candidates of the MLE are reconstructed in floating
    /// point, so an exact comparison would miss them.
    SidedValue at_snapped(PlanePoint theta, double snap) const;

    /// Closed-side value only. Skips the exclusion check; grid callers
    /// filter cells first.
    double right_at(PlanePoint theta) const;

    const SensorArray& array() const { return *array_; }
    const SignalModel& model() const { return *model_; }

private:
    const SignalModel* model_;
    const SensorArray* array_;
    struct SensorData {
        std::size_t sensor;
        const std::vector<double>* times;
    };
    std::vector<SensorData> sensors_;
    // Tabulated compensator: prefix integrals of lambda over the knots.
    std::vector<double> knot_prefix_;

    double compensator(double tau) const;
    double event_sum(const std::vector<double>& times, double tau, bool closed) const;
};

}  // namespace poissonloc
