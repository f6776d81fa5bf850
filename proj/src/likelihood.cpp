#include "poissonloc/likelihood.hpp"

#include <algorithm>
#include <cmath>

namespace poissonloc {

namespace {

void check_admissible(const SensorArray& array, PlanePoint theta, const char* who) {
    if (array.excluded(theta)) throw ExclusionViolation(std::string(who) + ": theta inside an exclusion ball");
}

// Adaptive Simpson on [a,b] to absolute tolerance tol.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate(const F& f, double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Single-sensor Hellinger integrand between two delay hypotheses.
double hellinger_one_sensor(const SignalModel& model, double tau_a, double tau_b, double T) {
    const double n = model.scale_n;
    if (model.is_constant()) {
        const double l0 = model.lambda0;
        const double l1 = std::get<ConstantForm>(model.form).lambda1;
        const double d = std::sqrt(l0 + l1) - std::sqrt(l0);
        const double a = std::min(tau_a, T), b = std::min(tau_b, T);
        return n * d * d * std::abs(a - b);
    }
    const double lo = std::min(tau_a, tau_b);
    const double hi = std::max(tau_a, tau_b);
    auto integrand = [&](double t) {
        const double sa = t >= tau_a ? model.signal_value(t - tau_a) : 0.0;
        const double sb = t >= tau_b ? model.signal_value(t - tau_b) : 0.0;
        const double d = std::sqrt(n * (sa + model.lambda0)) - std::sqrt(n * (sb + model.lambda0));
        return d * d;
    };
    // Split at both change points; the integrand is smooth in between.
    double total = 0.0;
    const double cuts[3] = {std::min(lo, T), std::min(hi, T), T};
    double prev = 0.0;
    for (double cut : cuts) {
        total += integrate(integrand, prev, cut, 1e-9 / 3.0);
        prev = cut;
    }
    return total;
}

}  // namespace

LogLikelihoodField::LogLikelihoodField(const SignalModel& model, const SensorArray& array,
                                       std::span<const EventRecord> records)
    : model_(&model), array_(&array) {
    sensors_.reserve(records.size());
    for (const auto& rec : records) {
        if (rec.sensor >= array.size())
            throw DomainError("log_lr: record sensor index outside the array");
        sensors_.push_back({rec.sensor, &rec.times});
    }
    if (!model.is_constant()) {
        const auto& tab = std::get<TabulatedForm>(model.form);
        knot_prefix_.resize(tab.times.size(), 0.0);
        for (std::size_t i = 1; i < tab.times.size(); ++i)
            knot_prefix_[i] = knot_prefix_[i - 1] + 0.5 * (tab.values[i] + tab.values[i - 1]) *
                                                        (tab.times[i] - tab.times[i - 1]);
    }
}

double LogLikelihoodField::compensator(double tau) const {
    const double T = array_->horizon;
    if (model_->is_constant())
        return std::get<ConstantForm>(model_->form).lambda1 * (T - tau);
    // Exact trapezoid over the knots via the prefix table.
    const auto& tab = std::get<TabulatedForm>(model_->form);
    const double b = T - tau;
    if (b <= 0.0) return 0.0;
    if (b <= tab.times.front()) return b * tab.values.front();
    double acc = tab.times.front() * tab.values.front();
    if (b >= tab.times.back())
        return acc + knot_prefix_.back() + (b - tab.times.back()) * tab.values.back();
    const auto it = std::upper_bound(tab.times.begin(), tab.times.end(), b);
    const std::size_t i = static_cast<std::size_t>(it - tab.times.begin());
    const double t0 = tab.times[i - 1];
    const double v_b = model_->signal_value(b);
    return acc + knot_prefix_[i - 1] + 0.5 * (tab.values[i - 1] + v_b) * (b - t0);
}

double LogLikelihoodField::event_sum(const std::vector<double>& times, double tau,
                                     bool closed) const {
    // First index with t > tau (open) or t >= tau (closed).
    const auto begin =
        closed ? std::lower_bound(times.begin(), times.end(), tau)
               : std::upper_bound(times.begin(), times.end(), tau);
    if (model_->is_constant()) {
        return model_->log_jump() * static_cast<double>(times.end() - begin);
    }
    double acc = 0.0;
    for (auto it = begin; it != times.end(); ++it)
        acc += std::log1p(model_->signal_value(*it - tau) / model_->lambda0);
    return acc;
}

SidedValue LogLikelihoodField::at(PlanePoint theta) const { return at_snapped(theta, 0.0); }

SidedValue LogLikelihoodField::at_snapped(PlanePoint theta, double snap) const {
    check_admissible(*array_, theta, "log_lr");
    double left = 0.0, right = 0.0;
    for (const auto& sd : sensors_) {
        const double tau = delay(*array_, sd.sensor, theta);
        const double comp = model_->scale_n * compensator(std::min(tau, array_->horizon));
        left += event_sum(*sd.times, tau + snap, false) - comp;
        right += event_sum(*sd.times, tau - snap, true) - comp;
    }
    return {left, right};
}

double LogLikelihoodField::right_at(PlanePoint theta) const {
    double value = 0.0;
    const double T = array_->horizon;
    if (model_->is_constant()) {
        const double ell = model_->log_jump();
        const double lambda1 = std::get<ConstantForm>(model_->form).lambda1;
        for (const auto& sd : sensors_) {
            const double tau = delay(*array_, sd.sensor, theta);
            const auto& ts = *sd.times;
            const auto post = ts.end() - std::lower_bound(ts.begin(), ts.end(), tau);
            value += ell * static_cast<double>(post) -
                     model_->scale_n * lambda1 * (T - std::min(tau, T));
        }
        return value;
    }
    for (const auto& sd : sensors_) {
        const double tau = delay(*array_, sd.sensor, theta);
        value += event_sum(*sd.times, tau, true) -
                 model_->scale_n * compensator(std::min(tau, T));
    }
    return value;
}

SidedValue log_lr(const SignalModel& model, const SensorArray& array, PlanePoint theta,
                  std::span<const EventRecord> records) {
    return LogLikelihoodField(model, array, records).at(theta);
}

SidedValue log_lr_constant(const SignalModel& model, const SensorArray& array, PlanePoint theta,
                           std::span<const EventRecord> records) {
    if (!model.is_constant()) throw FormError("log_lr_constant: model form is tabulated");
    check_admissible(array, theta, "log_lr_constant");
    const double ell = model.log_jump();
    const double lambda1 = std::get<ConstantForm>(model.form).lambda1;
    const double T = array.horizon;
    double left = 0.0, right = 0.0;
    for (const auto& rec : records) {
        if (rec.sensor >= array.size())
            throw DomainError("log_lr_constant: record sensor index outside the array");
        const double tau = delay(array, rec.sensor, theta);
        const auto& ts = rec.times;
        const auto count_gt = ts.end() - std::upper_bound(ts.begin(), ts.end(), tau);
        const auto count_ge = ts.end() - std::lower_bound(ts.begin(), ts.end(), tau);
        const double comp = model.scale_n * lambda1 * (T - std::min(tau, T));
        left += ell * static_cast<double>(count_gt) - comp;
        right += ell * static_cast<double>(count_ge) - comp;
    }
    return {left, right};
}

double hellinger(const SignalModel& model, const SensorArray& array, PlanePoint theta_a,
                 PlanePoint theta_b) {
    check_admissible(array, theta_a, "hellinger");
    check_admissible(array, theta_b, "hellinger");
    double total = 0.0;
    for (std::size_t j = 0; j < array.size(); ++j)
        total += hellinger_one_sensor(model, delay(array, j, theta_a), delay(array, j, theta_b),
                                      array.horizon);
    return total;
}

double expected_half_lr(const SignalModel& model, const SensorArray& array, PlanePoint theta0,
                        PlanePoint u) {
    const PlanePoint shifted = theta0 + (1.0 / model.scale_n) * u;
    return std::exp(-0.5 * hellinger(model, array, theta0, shifted));
}

}  // namespace poissonloc
