#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "poissonloc/errors.hpp"

namespace poissonloc {

/// A 2-D coordinate: position of the source or of a sensor.
struct PlanePoint {
    double x = 0.0;
    double y = 0.0;
};

inline PlanePoint operator+(PlanePoint a, PlanePoint b) { return {a.x + b.x, a.y + b.y}; }
inline PlanePoint operator-(PlanePoint a, PlanePoint b) { return {a.x - b.x, a.y - b.y}; }
inline PlanePoint operator*(double s, PlanePoint p) { return {s * p.x, s * p.y}; }
inline double dot(PlanePoint a, PlanePoint b) { return a.x * b.x + a.y * b.y; }
inline double norm(PlanePoint p) { return std::hypot(p.x, p.y); }
inline double distance(PlanePoint a, PlanePoint b) { return norm(a - b); }

/// Open axis-aligned search rectangle for the source position.
struct ParameterRectangle {
    double alpha1, alpha2;  // x-range
    double beta1, beta2;    // y-range

    double width() const { return alpha2 - alpha1; }
    double height() const { return beta2 - beta1; }
    double area() const { return width() * height(); }
    double diameter() const { return std::hypot(width(), height()); }
    PlanePoint centroid() const { return {0.5 * (alpha1 + alpha2), 0.5 * (beta1 + beta2)}; }
    bool contains(PlanePoint p) const {
        return p.x >= alpha1 && p.x <= alpha2 && p.y >= beta1 && p.y <= beta2;
    }
    PlanePoint clamp(PlanePoint p) const;
};

/// Fixed sensor network: positions, propagation speed, exclusion radius,
/// search rectangle and observation horizon. Positions are pairwise
/// distinct; at least three sensors are required. Identifiability of a
/// concrete configuration is checked by validate_identifiability, not here.
struct SensorArray {
    std::vector<PlanePoint> sensors;
    double nu;       // propagation speed (length / time)
    double epsilon;  // exclusion radius around each sensor
    ParameterRectangle theta_box;
    double horizon;  // observation window [0, horizon]

    SensorArray(std::vector<PlanePoint> sensors_, double nu_, double epsilon_,
                ParameterRectangle theta_box_, double horizon_);

    std::size_t size() const { return sensors.size(); }

    /// True when `theta` lies inside some sensor's closed epsilon-ball.
    bool excluded(PlanePoint theta) const;
};

/// Per-sensor distances, delays and unit vectors pointing from the source
/// toward each sensor.
struct DirectionFrame {
    std::vector<double> rho;      // distances ||theta_j - theta0||
    std::vector<double> tau;      // delays rho_j / nu
    std::vector<PlanePoint> m;    // unit vectors (theta_j - theta0) / rho_j
};

/// One entry of the identifiability report.
struct ValidationCheck {
    std::string name;
    bool passed;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    std::vector<std::string> warnings;
    bool all_passed() const;
    std::string summary() const;
};

struct SignalModel;

/// Signal travel time from `theta` to sensor `j`: ||theta_j - theta|| / nu.
double delay(const SensorArray& array, std::size_t j, PlanePoint theta);

/// Distances, delays and unit direction vectors at a candidate source
/// position. Throws ExclusionViolation when any sensor is closer than
/// epsilon.
DirectionFrame direction_frame(const SensorArray& array, PlanePoint theta0);

/// Determinant of the alignment matrix |x1 x2 x3; y1 y2 y3; 1 1 1| for the
/// first three sensors; zero iff they are collinear.
double alignment_determinant(const SensorArray& array);

/// Identifiability checks on a validation grid over theta_box:
///   i1  — the rectangle minus the exclusion balls is nonempty;
///   i2  — the signal form is smooth enough (constant always passes;
///         tabulated forms pass a bounded-second-difference check);
///   i3  — the first three sensors are not aligned;
///   delay_window — every admissible grid point has all delays in
///         (0, horizon).
/// Failures are report entries, never exceptions.
ValidationReport validate_identifiability(const SensorArray& array, const SignalModel& signal);

}  // namespace poissonloc
