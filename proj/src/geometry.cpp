#include "poissonloc/geometry.hpp"

#include <algorithm>
#include <sstream>

#include "poissonloc/signal.hpp"

namespace poissonloc {

namespace {

bool finite(PlanePoint p) { return std::isfinite(p.x) && std::isfinite(p.y); }

// 101 x 101 midpoint validation grid over the rectangle.
constexpr int kValidationGrid = 101;

}  // namespace

PlanePoint ParameterRectangle::clamp(PlanePoint p) const {
    return {std::clamp(p.x, alpha1, alpha2), std::clamp(p.y, beta1, beta2)};
}

SensorArray::SensorArray(std::vector<PlanePoint> sensors_, double nu_, double epsilon_,
                         ParameterRectangle theta_box_, double horizon_)
    : sensors(std::move(sensors_)),
      nu(nu_),
      epsilon(epsilon_),
      theta_box(theta_box_),
      horizon(horizon_) {
    if (sensors.size() < 3) throw ConfigError("geometry.sensors: at least 3 sensors required");
    for (const auto& s : sensors)
        if (!finite(s)) throw ConfigError("geometry.sensors: coordinates must be finite");
    for (std::size_t i = 0; i < sensors.size(); ++i)
        for (std::size_t j = i + 1; j < sensors.size(); ++j)
            if (sensors[i].x == sensors[j].x && sensors[i].y == sensors[j].y)
                throw ConfigError("geometry.sensors: positions must be pairwise distinct");
    if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("geometry.nu: must be > 0");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw ConfigError("geometry.epsilon: must be > 0");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ConfigError("geometry.horizon: must be > 0");
    if (!(theta_box.alpha1 < theta_box.alpha2) || !(theta_box.beta1 < theta_box.beta2) ||
        !std::isfinite(theta_box.alpha1) || !std::isfinite(theta_box.alpha2) ||
        !std::isfinite(theta_box.beta1) || !std::isfinite(theta_box.beta2))
        throw ConfigError("geometry.theta_box: bounds must be finite with alpha1<alpha2, beta1<beta2");
}

bool SensorArray::excluded(PlanePoint theta) const {
    for (const auto& s : sensors)
        if (distance(s, theta) <= epsilon) return true;
    return false;
}

double delay(const SensorArray& array, std::size_t j, PlanePoint theta) {
    if (j >= array.sensors.size()) throw DomainError("delay: sensor index out of range");
    if (!finite(theta)) throw DomainError("delay: theta must be finite");
    return distance(array.sensors[j], theta) / array.nu;
}

DirectionFrame direction_frame(const SensorArray& array, PlanePoint theta0) {
    DirectionFrame frame;
    frame.rho.reserve(array.size());
    frame.tau.reserve(array.size());
    frame.m.reserve(array.size());
    for (std::size_t j = 0; j < array.size(); ++j) {
        const double rho = distance(array.sensors[j], theta0);
        if (rho < array.epsilon) {
            std::ostringstream msg;
            msg << "direction_frame: theta0 within epsilon of sensor " << j;
            throw ExclusionViolation(msg.str());
        }
        frame.rho.push_back(rho);
        frame.tau.push_back(rho / array.nu);
        frame.m.push_back({(array.sensors[j].x - theta0.x) / rho,
                           (array.sensors[j].y - theta0.y) / rho});
    }
    return frame;
}

double alignment_determinant(const SensorArray& array) {
    const auto& s = array.sensors;
    return s[0].x * (s[1].y - s[2].y) - s[1].x * (s[0].y - s[2].y) +
           s[2].x * (s[0].y - s[1].y);
}

bool ValidationReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const ValidationCheck& c) { return c.passed; });
}

std::string ValidationReport::summary() const {
    std::ostringstream out;
    for (const auto& c : checks)
        out << (c.passed ? "pass" : "FAIL") << "  " << c.name << ": " << c.detail << "\n";
    for (const auto& w : warnings) out << "warn  " << w << "\n";
    return out.str();
}

ValidationReport validate_identifiability(const SensorArray& array, const SignalModel& signal) {
    ValidationReport report;
    const auto& box = array.theta_box;
    const double hx = box.width() / kValidationGrid;
    const double hy = box.height() / kValidationGrid;

    // I1 + delay window on the same grid sweep.
    std::size_t admissible = 0;
    std::size_t window_violations = 0;
    double worst_tau = 0.0;
    for (int i = 0; i < kValidationGrid; ++i) {
        for (int k = 0; k < kValidationGrid; ++k) {
            const PlanePoint theta{box.alpha1 + (i + 0.5) * hx, box.beta1 + (k + 0.5) * hy};
            if (array.excluded(theta)) continue;
            ++admissible;
            for (std::size_t j = 0; j < array.size(); ++j) {
                const double tau = delay(array, j, theta);
                worst_tau = std::max(worst_tau, tau);
                if (!(tau > 0.0 && tau < array.horizon)) ++window_violations;
            }
        }
    }
    {
        std::ostringstream d;
        d << admissible << " of " << kValidationGrid * kValidationGrid
          << " grid points outside exclusion balls";
        report.checks.push_back({"i1_exclusion_balls_removable", admissible > 0, d.str()});
    }

    // I2: smoothness of the signal form.
    if (signal.is_constant()) {
        report.checks.push_back({"i2_signal_smoothness", true, "constant signal"});
    } else {
        const auto& tab = std::get<TabulatedForm>(signal.form);
        bool ok = tab.times.size() >= 2;
        double max_second_diff = 0.0;
        for (std::size_t i = 0; ok && i < tab.values.size(); ++i) {
            if (!std::isfinite(tab.values[i])) ok = false;
        }
        // Bounded second differences of the interpolant slope as a proxy for
        // two continuous derivatives of the underlying signal.
        for (std::size_t i = 0; ok && i + 2 < tab.times.size(); ++i) {
            const double s1 = (tab.values[i + 1] - tab.values[i]) / (tab.times[i + 1] - tab.times[i]);
            const double s2 =
                (tab.values[i + 2] - tab.values[i + 1]) / (tab.times[i + 2] - tab.times[i + 1]);
            const double gap = 0.5 * (tab.times[i + 2] - tab.times[i]);
            max_second_diff = std::max(max_second_diff, std::abs(s2 - s1) / gap);
        }
        const double scale = std::max(1.0, signal.signal_max());
        ok = ok && std::isfinite(max_second_diff) && max_second_diff <= 1e6 * scale;
        std::ostringstream d;
        d << "max normalized second difference " << max_second_diff;
        report.checks.push_back({"i2_signal_smoothness", ok, d.str()});
    }

    // I3 on the first three sensors; threshold is relative to the squared
    // coordinate magnitude since the determinant is twice a triangle area.
    {
        double mag = 1.0;
        for (int j = 0; j < 3; ++j)
            mag = std::max({mag, std::abs(array.sensors[j].x), std::abs(array.sensors[j].y)});
        const double det = alignment_determinant(array);
        const bool ok = std::abs(det) > 1e-9 * mag * mag;
        std::ostringstream d;
        d << "determinant " << det << " (threshold " << 1e-9 * mag * mag << ")";
        report.checks.push_back({"i3_sensors_not_aligned", ok, d.str()});
    }

    {
        std::ostringstream d;
        d << window_violations << " delay-window violations, max delay " << worst_tau
          << " vs horizon " << array.horizon;
        report.checks.push_back({"delay_window", window_violations == 0, d.str()});
    }

    if (signal.signal_min() < 0.01 * signal.lambda0) {
        std::ostringstream w;
        w << "min signal value " << signal.signal_min() << " below 0.01 * lambda0; "
          << "the exponential tail bound weakens for near-zero signals";
        report.warnings.push_back(w.str());
    }
    return report;
}

}  // namespace poissonloc
