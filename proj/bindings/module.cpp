#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "poissonloc/harness.hpp"

namespace py = pybind11;
using namespace poissonloc;

namespace {

SignalForm form_from_args(double lambda1, const py::object& knots) {
    if (knots.is_none()) return ConstantForm{lambda1};
    TabulatedForm tab;
    for (const auto& pair : knots.cast<std::vector<std::pair<double, double>>>()) {
        tab.times.push_back(pair.first);
        tab.values.push_back(pair.second);
    }
    return tab;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Poisson source localization from change-point event streams";

    py::register_exception<Error>(m, "PoissonlocError");

    py::class_<PlanePoint>(m, "PlanePoint")
        .def(py::init<double, double>(), py::arg("x"), py::arg("y"))
        .def_readwrite("x", &PlanePoint::x)
        .def_readwrite("y", &PlanePoint::y)
        .def("__repr__", [](const PlanePoint& p) {
            return "PlanePoint(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
        });

    py::class_<ParameterRectangle>(m, "ParameterRectangle")
        .def(py::init<double, double, double, double>(), py::arg("alpha1"), py::arg("alpha2"),
             py::arg("beta1"), py::arg("beta2"))
        .def_readonly("alpha1", &ParameterRectangle::alpha1)
        .def_readonly("alpha2", &ParameterRectangle::alpha2)
        .def_readonly("beta1", &ParameterRectangle::beta1)
        .def_readonly("beta2", &ParameterRectangle::beta2);

    py::class_<SensorArray>(m, "SensorArray")
        .def(py::init([](const std::vector<std::pair<double, double>>& sensors, double nu,
                         double epsilon, const std::vector<double>& theta_box, double horizon) {
                 std::vector<PlanePoint> points;
                 for (const auto& [x, y] : sensors) points.push_back({x, y});
                 if (theta_box.size() != 4)
                     throw ConfigError("theta_box: expected [alpha1, alpha2, beta1, beta2]");
                 return SensorArray(points, nu, epsilon,
                                    ParameterRectangle{theta_box[0], theta_box[1], theta_box[2],
                                                       theta_box[3]},
                                    horizon);
             }),
             py::arg("sensors"), py::arg("nu"), py::arg("epsilon"), py::arg("theta_box"),
             py::arg("horizon"))
        .def_readonly("nu", &SensorArray::nu)
        .def_readonly("epsilon", &SensorArray::epsilon)
        .def_readonly("horizon", &SensorArray::horizon)
        .def("excluded", &SensorArray::excluded, py::arg("theta"));

    py::class_<SignalModel>(m, "SignalModel")
        .def(py::init([](double lambda0, double lambda1, double scale_n, const py::object& knots) {
                 return SignalModel(lambda0, form_from_args(lambda1, knots), scale_n);
             }),
             py::arg("lambda0"), py::arg("lambda1") = 0.0, py::arg("scale_n") = 1.0,
             py::arg("knots") = py::none())
        .def_readonly("lambda0", &SignalModel::lambda0)
        .def_readonly("scale_n", &SignalModel::scale_n)
        .def_property_readonly("log_jump", &SignalModel::log_jump);

    py::class_<DirectionFrame>(m, "DirectionFrame")
        .def_readonly("rho", &DirectionFrame::rho)
        .def_readonly("tau", &DirectionFrame::tau)
        .def_property_readonly("m", [](const DirectionFrame& f) {
            std::vector<std::pair<double, double>> out;
            for (const auto& m : f.m) out.emplace_back(m.x, m.y);
            return out;
        });

    py::class_<EventRecord>(m, "EventRecord")
        .def(py::init([](std::size_t sensor, std::vector<double> times, double horizon) {
                 return EventRecord{sensor, std::move(times), horizon};
             }),
             py::arg("sensor"), py::arg("times"), py::arg("horizon"))
        .def_readonly("sensor", &EventRecord::sensor)
        .def_readonly("times", &EventRecord::times)
        .def_readonly("horizon", &EventRecord::horizon)
        .def("count", &EventRecord::count);

    py::class_<SidedValue>(m, "SidedValue")
        .def_readonly("left", &SidedValue::left)
        .def_readonly("right", &SidedValue::right);

    py::class_<EstimateDiagnostics>(m, "EstimateDiagnostics")
        .def_readonly("refine_factor", &EstimateDiagnostics::refine_factor)
        .def_readonly("expansion_rounds", &EstimateDiagnostics::expansion_rounds)
        .def_readonly("log_mass", &EstimateDiagnostics::log_mass)
        .def_readonly("boundary_mass_fraction", &EstimateDiagnostics::boundary_mass_fraction)
        .def_readonly("right_limit_attained", &EstimateDiagnostics::right_limit_attained)
        .def_readonly("condition_number", &EstimateDiagnostics::condition_number);

    py::class_<EstimateResult>(m, "EstimateResult")
        .def_property_readonly("estimate",
                               [](const EstimateResult& r) {
                                   return std::make_pair(r.estimate.x, r.estimate.y);
                               })
        .def_property_readonly("kind",
                               [](const EstimateResult& r) { return to_string(r.kind); })
        .def_readonly("diagnostics", &EstimateResult::diagnostics);

    py::class_<LimitModel>(m, "LimitModel")
        .def_readonly("ell", &LimitModel::ell)
        .def_readonly("rate_plus", &LimitModel::rate_plus)
        .def_readonly("rate_minus", &LimitModel::rate_minus)
        .def_readonly("truncation", &LimitModel::truncation)
        .def_readonly("resolution", &LimitModel::resolution);

    py::class_<ZetaSample>(m, "ZetaSample")
        .def_property_readonly("zeta",
                               [](const ZetaSample& z) {
                                   return std::make_pair(z.zeta.x, z.zeta.y);
                               })
        .def_readonly("log_mass", &ZetaSample::log_mass)
        .def_readonly("tail_fraction", &ZetaSample::tail_fraction)
        .def_readonly("truncated", &ZetaSample::truncated);

    m.def("delay", &delay, py::arg("array"), py::arg("sensor"), py::arg("theta"),
          "Signal travel time from theta to one sensor");
    m.def("direction_frame", &direction_frame, py::arg("array"), py::arg("theta0"));
    m.def(
        "validate_identifiability",
        [](const SensorArray& array, const SignalModel& model) {
            const ValidationReport report = validate_identifiability(array, model);
            py::dict out;
            for (const auto& c : report.checks) out[c.name.c_str()] = c.passed;
            out["warnings"] = report.warnings;
            out["all_passed"] = report.all_passed();
            return out;
        },
        py::arg("array"), py::arg("model"));

    m.def(
        "sample_events",
        [](const SignalModel& model, const SensorArray& array, PlanePoint theta0,
           std::uint64_t seed, std::uint64_t replication) {
            return sample_events(model, array, theta0, SimulationSeed{seed, replication});
        },
        py::arg("model"), py::arg("array"), py::arg("theta0"), py::arg("seed"),
        py::arg("replication") = 0);
    m.def("counting_value", &counting_value, py::arg("record"), py::arg("t"));

    m.def(
        "log_lr",
        [](const SignalModel& model, const SensorArray& array, PlanePoint theta,
           const std::vector<EventRecord>& records) { return log_lr(model, array, theta, records); },
        py::arg("model"), py::arg("array"), py::arg("theta"), py::arg("records"));
    m.def(
        "log_lr_constant",
        [](const SignalModel& model, const SensorArray& array, PlanePoint theta,
           const std::vector<EventRecord>& records) {
            return log_lr_constant(model, array, theta, records);
        },
        py::arg("model"), py::arg("array"), py::arg("theta"), py::arg("records"));
    m.def("hellinger", &hellinger, py::arg("model"), py::arg("array"), py::arg("theta_a"),
          py::arg("theta_b"));
    m.def("expected_half_lr", &expected_half_lr, py::arg("model"), py::arg("array"),
          py::arg("theta0"), py::arg("u"));

    m.def(
        "bayes_estimate",
        [](const SignalModel& model, const SensorArray& array,
           const std::vector<EventRecord>& records, const py::object& prior, bool single_stage) {
            BayesGridPolicy policy;
            policy.single_stage = single_stage;
            const Prior p = prior.is_none()
                                ? Prior::uniform()
                                : Prior::density([prior](PlanePoint theta) {
                                      return prior.cast<py::function>()(theta.x, theta.y)
                                          .cast<double>();
                                  });
            return bayes_estimate(model, array, records, p, policy);
        },
        py::arg("model"), py::arg("array"), py::arg("records"), py::arg("prior") = py::none(),
        py::arg("single_stage") = false);
    m.def(
        "mle_estimate",
        [](const SignalModel& model, const SensorArray& array,
           const std::vector<EventRecord>& records) {
            return mle_estimate(model, array, records);
        },
        py::arg("model"), py::arg("array"), py::arg("records"));
    m.def("estimate_arrival", &estimate_arrival, py::arg("model"), py::arg("record"));
    m.def(
        "trilaterate",
        [](const SensorArray& array, const std::vector<double>& taus) {
            return trilaterate(array, taus);
        },
        py::arg("array"), py::arg("tau_hats"));

    m.def("limit_model_for", &limit_model_for, py::arg("model"), py::arg("array"),
          py::arg("theta0"));
    m.def(
        "sample_ln_z",
        [](const LimitModel& limit, const std::vector<std::pair<double, double>>& us,
           std::uint64_t seed, std::uint64_t replication) {
            std::vector<PlanePoint> points;
            for (const auto& [x, y] : us) points.push_back({x, y});
            return sample_ln_z(limit, points, SimulationSeed{seed, replication});
        },
        py::arg("limit"), py::arg("us"), py::arg("seed"), py::arg("replication") = 0);
    m.def(
        "sample_zeta",
        [](const LimitModel& limit, std::uint64_t seed, std::uint64_t replication) {
            return sample_zeta(limit, SimulationSeed{seed, replication});
        },
        py::arg("limit"), py::arg("seed"), py::arg("replication") = 0);
    m.def(
        "efficiency_bound",
        [](const LimitModel& limit, std::size_t reps, std::uint64_t seed, unsigned jobs) {
            const EfficiencyBound b = efficiency_bound(limit, reps, SimulationSeed{seed, 0}, jobs);
            return std::make_tuple(b.value, b.std_error, b.reps);
        },
        py::arg("limit"), py::arg("reps"), py::arg("seed"), py::arg("jobs") = 1);

    m.def("default_config_json", [] { return config_to_json(default_config()); });
    m.def("cli", &cli, py::arg("argv"), "Run the command-line interface in-process");

    m.attr("__version__") = "0.1.0";
}
