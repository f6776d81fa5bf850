#pragma once

#include <string>
#include <vector>

#include "poissonloc/geometry.hpp"
#include "poissonloc/rng.hpp"
#include "poissonloc/signal.hpp"

namespace poissonloc {

/// Event timestamps registered by one sensor, strictly increasing in
/// [0, horizon].
struct EventRecord {
    std::size_t sensor = 0;
    std::vector<double> times;
    double horizon = 0.0;

    std::size_t count() const { return times.size(); }
};

/// Exact draw of the change-point Poisson processes at every sensor of the
/// array. Constant form: per-segment Poisson counts with uniform order
/// statistics. Tabulated form: thinning against the constant dominator
/// n (lambda0 + max lambda).
std::vector<EventRecord> sample_events(const SignalModel& model, const SensorArray& array,
                                       PlanePoint theta0, const SimulationSeed& seed);

/// Counting process value X(t): number of events with timestamp <= t
/// (cadlag). Throws DomainError outside [0, horizon].
long long counting_value(const EventRecord& record, double t);

/// CSV (sensor,time) round trip; rows sorted by (sensor, time).
void write_events_csv(const std::string& path, const std::vector<EventRecord>& records);
std::vector<EventRecord> read_events_csv(const std::string& path, double horizon);

}  // namespace poissonloc
