#include "poissonloc/simulate.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace poissonloc {

namespace {

// Sorted uniform timestamps on [a, b) for a homogeneous segment.
void append_segment(std::mt19937_64& eng, double rate, double a, double b,
                    std::vector<double>& out) {
    if (!(b > a) || rate <= 0.0) return;
    const long long count = poisson(eng, rate * (b - a));
    const std::size_t base = out.size();
    out.reserve(base + static_cast<std::size_t>(count));
    for (long long i = 0; i < count; ++i) out.push_back(a + (b - a) * uniform01(eng));
    std::sort(out.begin() + base, out.end());
}

void enforce_strict_increase(std::vector<double>& times) {
    for (std::size_t i = 1; i < times.size(); ++i)
        if (times[i] <= times[i - 1])
            times[i] = std::nextafter(times[i - 1], std::numeric_limits<double>::infinity());
}

}  // namespace

std::vector<EventRecord> sample_events(const SignalModel& model, const SensorArray& array,
                                       PlanePoint theta0, const SimulationSeed& seed) {
    const DirectionFrame frame = direction_frame(array, theta0);  // exclusion check
    const double T = array.horizon;
    std::vector<EventRecord> records;
    records.reserve(array.size());
    for (std::size_t j = 0; j < array.size(); ++j) {
        auto eng = seed.stream(j);
        EventRecord rec;
        rec.sensor = j;
        rec.horizon = T;
        const double tau = std::min(frame.tau[j], T);
        if (model.is_constant()) {
            const double lambda1 = std::get<ConstantForm>(model.form).lambda1;
            append_segment(eng, model.scale_n * model.lambda0, 0.0, tau, rec.times);
            append_segment(eng, model.scale_n * (model.lambda0 + lambda1), tau, T, rec.times);
        } else {
            // Thinning against the constant dominator n (lambda0 + max lambda).
            const double dominator = model.scale_n * (model.lambda0 + model.signal_max());
            std::vector<double> candidates;
            append_segment(eng, dominator, 0.0, T, candidates);
            for (double t : candidates) {
                const double accept = intensity(model, tau, t, T) / dominator;
                if (uniform01(eng) < accept) rec.times.push_back(t);
            }
        }
        enforce_strict_increase(rec.times);
        records.push_back(std::move(rec));
    }
    return records;
}

long long counting_value(const EventRecord& record, double t) {
    if (!(t >= 0.0 && t <= record.horizon))
        throw DomainError("counting_value: t outside [0, horizon]");
    return std::upper_bound(record.times.begin(), record.times.end(), t) - record.times.begin();
}

void write_events_csv(const std::string& path, const std::vector<EventRecord>& records) {
    std::ofstream out(path);
    if (!out) throw IoError("write_events_csv: cannot open " + path);
    out << "sensor,time\n";
    char buf[64];
    for (const auto& rec : records)
        for (double t : rec.times) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g\n", rec.sensor, t);
            out << buf;
        }
    if (!out) throw IoError("write_events_csv: write failed for " + path);
}

std::vector<EventRecord> read_events_csv(const std::string& path, double horizon) {
    std::ifstream in(path);
    if (!in) throw IoError("read_events_csv: cannot open " + path);
    std::vector<EventRecord> records;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string a, b;
        if (!std::getline(row, a, ',') || !std::getline(row, b))
            throw Error("read_events_csv: expected two columns in " + path);
        std::size_t sensor;
        double t;
        try {
            sensor = static_cast<std::size_t>(std::stoull(a));
            t = std::stod(b);
        } catch (const std::exception&) {
            if (first) {
                first = false;
                continue;
            }
            throw Error("read_events_csv: non-numeric row '" + line + "'");
        }
        first = false;
        while (records.size() <= sensor) {
            EventRecord rec;
            rec.sensor = records.size();
            rec.horizon = horizon;
            records.push_back(std::move(rec));
        }
        if (!(t >= 0.0 && t <= horizon))
            throw Error("read_events_csv: timestamp outside [0, horizon]");
        records[sensor].times.push_back(t);
    }
    for (auto& rec : records) {
        if (!std::is_sorted(rec.times.begin(), rec.times.end()))
            std::sort(rec.times.begin(), rec.times.end());
        enforce_strict_increase(rec.times);
    }
    return records;
}

}  // namespace poissonloc
