#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "poissonloc/geometry.hpp"
#include "poissonloc/rng.hpp"
#include "poissonloc/signal.hpp"

namespace poissonloc {

/// Data defining the limit likelihood-ratio field
///   ln Z(u) = sum_j [ l N_{j,+}(s_j) 1{s_j>=0} - l N_{j,-}(-s_j) 1{s_j<0} ]
///             - <drift, u>,        s_j = <m_j, u>,
/// where N_{j,+} and N_{j,-} are independent Poisson processes of rates
/// rate_plus = lambda0/nu and rate_minus = (lambda0+lambda1)/nu in the
/// projected coordinate. These rates make E Z(u) = 1 for every u.
struct LimitModel {
    std::vector<PlanePoint> directions;  // unit vectors m_j
    double ell;                          // jump size ln(1 + lambda1/lambda0)
    double rate_plus;                    // lambda0 / nu
    double rate_minus;                   // (lambda0 + lambda1) / nu
    PlanePoint drift;                    // (lambda1/nu) * sum_j m_j
    double truncation = 0.0;             // integration half-width U
    double resolution = 0.0;             // grid step h

    LimitModel(std::vector<PlanePoint> directions_, double ell_, double rate_plus_,
               double rate_minus_, PlanePoint drift_, double truncation_ = 0.0,
               double resolution_ = 0.0);
};

/// Limit model induced by a signal model and geometry at the true source
/// position. Defaults: U = 40 nu / lambda(0) * max(1, 1/lambda0),
/// h = U / 400.
LimitModel limit_model_for(const SignalModel& model, const SensorArray& array, PlanePoint theta0);

/// One draw of the limit vector zeta = int u Z(u) du / int Z(u) du over
/// [-U, U]^2 by the midpoint rule.
struct ZetaSample {
    PlanePoint zeta;
    double log_mass;       // ln int Z(u) du over the final window
    double tail_fraction;  // mass share of the outermost grid ring
    double window;         // final half-width (after any doubling)
    bool truncated;        // tail fraction still above 1e-4 after expansion
};

/// Single realization of the three two-sided Poisson paths, evaluated at
/// every requested displacement. One path per sensor and side serves all
/// points, preserving the exact dependence structure of the field.
std::vector<double> sample_ln_z(const LimitModel& limit, std::span<const PlanePoint> us,
                                const SimulationSeed& seed);

/// One zeta draw; the window doubles (up to three times) while the
/// outermost ring holds at least 1e-4 of the mass.
ZetaSample sample_zeta(const LimitModel& limit, const SimulationSeed& seed);

/// Monte Carlo estimate of E||zeta||^2 (the minimax risk bound) with its
/// standard error.
struct EfficiencyBound {
    double value;
    double std_error;
    std::size_t reps;
};

EfficiencyBound efficiency_bound(const LimitModel& limit, std::size_t reps,
                                 const SimulationSeed& seed, unsigned jobs = 1);

void write_zeta_csv(const std::string& path, std::span<const ZetaSample> samples);

}  // namespace poissonloc
