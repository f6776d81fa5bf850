#pragma once

#include <string>
#include <variant>
#include <vector>

#include "poissonloc/errors.hpp"

namespace poissonloc {

/// Constant signal intensity: lambda(t) = lambda1 for t >= 0.
struct ConstantForm {
    double lambda1;
};

/// Tabulated signal intensity: linear interpolation between sorted knots
/// (t_k, v_k), t_0 = 0. Values clamp to the nearest knot outside the table;
/// lambda(t) = 0 for t < 0 by the arrival indicator.
struct TabulatedForm {
    std::vector<double> times;
    std::vector<double> values;
};

using SignalForm = std::variant<ConstantForm, TabulatedForm>;

/// Intensity model lambda_{j,n}(theta, t) = n lambda(t - tau_j) 1{t >= tau_j}
/// + n lambda0. `scale_n` is the large parameter; it is a real so scale
/// sweeps are not restricted to integers.
struct SignalModel {
    double lambda0;
    SignalForm form;
    double scale_n = 1.0;

    SignalModel(double lambda0_, SignalForm form_, double scale_n_ = 1.0);

    bool is_constant() const { return std::holds_alternative<ConstantForm>(form); }

    /// Signal intensity lambda(s) for s >= 0 (without the indicator or the
    /// scale factor).
    double signal_value(double s) const;

    /// Jump size lambda(0) of the intensity at the arrival time.
    double jump_value() const { return signal_value(0.0); }

    /// Largest signal value over the support (thinning dominator).
    double signal_max() const;

    /// Smallest tabulated value (equals lambda1 for the constant form).
    double signal_min() const;

    /// log(1 + lambda(0)/lambda0), the jump of the log-likelihood when an
    /// event sits exactly at the arrival time.
    double log_jump() const;
};

/// n lambda(t - tau_j) 1{t >= tau_j} + n lambda0. The indicator is closed at
/// tau_j (right-continuous intensity). Throws DomainError when t is outside
/// [0, horizon].
double intensity(const SignalModel& model, double tau_j, double t, double horizon);

/// Integral of the signal part over the observation window,
/// int_{tau_j}^{horizon} lambda(t - tau_j) dt, WITHOUT the factor n.
/// Exact for both forms (closed form / trapezoid on the knots).
double cumulative_signal(const SignalModel& model, double tau_j, double horizon);

/// ln(1 + lambda(t - tau_j)/lambda0) for t >= tau_j.
double log_ratio(const SignalModel& model, double tau_j, double t);

/// Load a tabulated form from a two-column CSV (time,value); header row
/// optional.
TabulatedForm load_tabulated_csv(const std::string& path);

}  // namespace poissonloc
