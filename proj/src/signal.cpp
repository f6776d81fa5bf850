#include "poissonloc/signal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace poissonloc {

namespace {

void check_tabulated(const TabulatedForm& tab) {
    if (tab.times.empty() || tab.times.size() != tab.values.size())
        throw ConfigError("signal.form: tabulated knots need matching nonempty times/values");
    for (std::size_t i = 0; i < tab.times.size(); ++i) {
        if (!std::isfinite(tab.times[i]) || !std::isfinite(tab.values[i]))
            throw ConfigError("signal.form: tabulated knots must be finite");
        if (tab.values[i] < 0.0)
            throw ConfigError("signal.form: tabulated values must be nonnegative");
        if (i > 0 && tab.times[i] <= tab.times[i - 1])
            throw ConfigError("signal.form: tabulated times must be strictly increasing");
    }
    if (tab.times.front() < 0.0)
        throw ConfigError("signal.form: tabulated times start at or after 0");
}

// Piecewise-linear interpolation, clamped to the end knots.
double interpolate(const TabulatedForm& tab, double s) {
    if (s <= tab.times.front()) return tab.values.front();
    if (s >= tab.times.back()) return tab.values.back();
    const auto it = std::upper_bound(tab.times.begin(), tab.times.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - tab.times.begin());
    const double w = (s - tab.times[i - 1]) / (tab.times[i] - tab.times[i - 1]);
    return tab.values[i - 1] + w * (tab.values[i] - tab.values[i - 1]);
}

// Exact integral of the interpolant over [0, b].
double integral_to(const TabulatedForm& tab, double b) {
    if (b <= 0.0) return 0.0;
    double acc = 0.0;
    // Leading flat piece before the first knot.
    const double lead = std::min(b, tab.times.front());
    acc += lead * tab.values.front();
    if (b <= tab.times.front()) return acc;
    for (std::size_t i = 0; i + 1 < tab.times.size(); ++i) {
        const double t0 = tab.times[i], t1 = tab.times[i + 1];
        if (b <= t0) break;
        const double hi = std::min(b, t1);
        const double v_hi = interpolate(tab, hi);
        acc += 0.5 * (tab.values[i] + v_hi) * (hi - t0);
        if (b <= t1) return acc;
    }
    // Trailing flat piece past the last knot.
    acc += (b - tab.times.back()) * tab.values.back();
    return acc;
}

}  // namespace

SignalModel::SignalModel(double lambda0_, SignalForm form_, double scale_n_)
    : lambda0(lambda0_), form(std::move(form_)), scale_n(scale_n_) {
    if (!(lambda0 > 0.0) || !std::isfinite(lambda0))
        throw ConfigError("signal.lambda0: must be > 0");
    if (!(scale_n > 0.0) || !std::isfinite(scale_n))
        throw ConfigError("signal.scale_n: must be > 0");
    if (const auto* c = std::get_if<ConstantForm>(&form)) {
        if (!(c->lambda1 > 0.0) || !std::isfinite(c->lambda1))
            throw ConfigError("signal.form.lambda1: must be > 0");
    } else {
        check_tabulated(std::get<TabulatedForm>(form));
    }
}

double SignalModel::signal_value(double s) const {
    if (s < 0.0) return 0.0;
    if (const auto* c = std::get_if<ConstantForm>(&form)) return c->lambda1;
    return interpolate(std::get<TabulatedForm>(form), s);
}

double SignalModel::signal_max() const {
    if (const auto* c = std::get_if<ConstantForm>(&form)) return c->lambda1;
    const auto& tab = std::get<TabulatedForm>(form);
    return *std::max_element(tab.values.begin(), tab.values.end());
}

double SignalModel::signal_min() const {
    if (const auto* c = std::get_if<ConstantForm>(&form)) return c->lambda1;
    const auto& tab = std::get<TabulatedForm>(form);
    return *std::min_element(tab.values.begin(), tab.values.end());
}

double SignalModel::log_jump() const { return std::log1p(jump_value() / lambda0); }

double intensity(const SignalModel& model, double tau_j, double t, double horizon) {
    if (!(t >= 0.0 && t <= horizon)) throw DomainError("intensity: t outside [0, horizon]");
    const double signal = t >= tau_j ? model.signal_value(t - tau_j) : 0.0;
    return model.scale_n * (signal + model.lambda0);
}

double cumulative_signal(const SignalModel& model, double tau_j, double horizon) {
    if (!(tau_j >= 0.0 && tau_j <= horizon))
        throw DomainError("cumulative_signal: tau_j outside [0, horizon]");
    const double span = horizon - tau_j;
    if (const auto* c = std::get_if<ConstantForm>(&model.form)) return c->lambda1 * span;
    return integral_to(std::get<TabulatedForm>(model.form), span);
}

double log_ratio(const SignalModel& model, double tau_j, double t) {
    if (t < tau_j) throw DomainError("log_ratio: t < tau_j");
    return std::log1p(model.signal_value(t - tau_j) / model.lambda0);
}

TabulatedForm load_tabulated_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_tabulated_csv: cannot open " + path);
    TabulatedForm tab;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string a, b;
        if (!std::getline(row, a, ',') || !std::getline(row, b))
            throw Error("load_tabulated_csv: expected two columns in " + path);
        try {
            const double t = std::stod(a);
            const double v = std::stod(b);
            tab.times.push_back(t);
            tab.values.push_back(v);
        } catch (const std::exception&) {
            if (first) {  // optional header
                first = false;
                continue;
            }
            throw Error("load_tabulated_csv: non-numeric row '" + line + "'");
        }
        first = false;
    }
    check_tabulated(tab);
    return tab;
}

}  // namespace poissonloc
