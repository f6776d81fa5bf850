#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "poissonloc/likelihood.hpp"

using namespace poissonloc;

namespace {

std::vector<EventRecord> empty_records(double horizon = 10.0) {
    return {{0, {}, horizon}, {1, {}, horizon}, {2, {}, horizon}};
}

}  // namespace

TEST_CASE("single-sensor log likelihood ratio, constant signal") {
    // tau = 2.5, events {3, 5}: 2 ln 3 - 2 * 7.5.
    const SensorArray array({{2.5, 0.0}, {0.0, 100.0}, {100.0, 0.0}}, 1.0, 0.1,
                            ParameterRectangle{-1.0, 1.0, -1.0, 1.0}, 10.0);
    const auto model = testing::reference_model(1.0);
    const std::vector<EventRecord> records = {{0, {3.0, 5.0}, 10.0}};
    const SidedValue v = log_lr(model, array, {0.0, 0.0}, records);
    const double want = 2.0 * std::log(3.0) - 15.0;
    CHECK(v.left == doctest::Approx(want).epsilon(1e-12));
    CHECK(v.right == doctest::Approx(want).epsilon(1e-12));

    const SidedValue c = log_lr_constant(model, array, {0.0, 0.0}, records);
    CHECK(c.left == doctest::Approx(want).epsilon(1e-12));
    CHECK(c.right == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("empty records leave only the compensator") {
    const auto array = testing::reference_array();
    const auto model = testing::reference_model(1.0);
    const auto records = empty_records();
    const SidedValue v = log_lr(model, array, {0.0, 0.0}, records);
    CHECK(v.left == doctest::Approx(-9.0).epsilon(1e-13));
    CHECK(v.right == doctest::Approx(-9.0).epsilon(1e-13));
}

TEST_CASE("event exactly on the delay circle splits the one-sided values") {
    const auto array = testing::reference_array();
    const auto model = testing::reference_model(1.0);
    const std::vector<EventRecord> records = {{0, {8.5, 9.0}, 10.0}};
    const SidedValue v = log_lr(model, array, {0.0, 0.0}, records);
    CHECK(v.right - v.left == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(v.right > v.left);
}

TEST_CASE("general and constant-form routes agree on random fixtures") {
    const auto array = testing::reference_array();
    std::mt19937_64 eng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const double n = 1.0 + 4.0 * uniform01(eng);
        const auto model = testing::reference_model(n);
        const auto records =
            sample_events(model, array, {0.0, 0.0}, SimulationSeed{111, static_cast<std::uint64_t>(trial)});
        const PlanePoint theta{-0.95 + 1.9 * uniform01(eng), -0.95 + 1.9 * uniform01(eng)};
        const SidedValue a = log_lr(model, array, theta, records);
        const SidedValue b = log_lr_constant(model, array, theta, records);
        worst = std::max({worst, std::abs(a.left - b.left), std::abs(a.right - b.right)});
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("events before the delay window leave only the compensator") {
    // Every delay over the rectangle exceeds 7; events below that are never
    // counted, so the value is the pure compensator at any theta.
    const auto array = testing::reference_array();
    const auto model = testing::reference_model(1.0);
    const std::vector<EventRecord> records = {
        {0, {1.0, 2.0}, 10.0}, {1, {0.5}, 10.0}, {2, {3.0, 4.0, 5.0}, 10.0}};
    const PlanePoint theta{0.5, 0.5};
    double compensator = 0.0;
    for (std::size_t j = 0; j < 3; ++j)
        compensator -= 2.0 * (10.0 - delay(array, j, theta));
    const SidedValue v = log_lr_constant(model, array, theta, records);
    CHECK(v.left == doctest::Approx(compensator).epsilon(1e-13));
    CHECK(v.right == doctest::Approx(compensator).epsilon(1e-13));
}

TEST_CASE("log_lr_constant rejects tabulated models") {
    const auto array = testing::reference_array();
    const SignalModel tab(1.0, TabulatedForm{{0.0, 10.0}, {2.0, 2.0}});
    const auto records = empty_records();
    CHECK_THROWS_AS(log_lr_constant(tab, array, {0.0, 0.0}, records), FormError);
    CHECK_THROWS_AS(log_lr(tab, array, {0.0, 8.45}, records), ExclusionViolation);
}

TEST_CASE("hellinger closed form for a single shifted sensor") {
    // Sensors 2 and 3 sit on the perpendicular bisector of the two source
    // hypotheses, so only sensor 1 contributes.
    const SensorArray array({{8.0, 0.0}, {0.25, 10.0}, {0.25, -10.0}}, 1.0, 0.1,
                            ParameterRectangle{-1.0, 1.0, -1.0, 1.0}, 10.0);
    const auto model = testing::reference_model(1.0);
    const PlanePoint a{0.0, 0.0}, b{0.5, 0.0};
    const double d = std::sqrt(3.0) - 1.0;
    CHECK(hellinger(model, array, a, b) == doctest::Approx(d * d * 0.5).epsilon(1e-12));
    CHECK(hellinger(model, array, a, a) == 0.0);

    const auto doubled = testing::reference_model(2.0);
    CHECK(hellinger(doubled, array, a, b) ==
          doctest::Approx(2.0 * hellinger(model, array, a, b)).epsilon(1e-12));

    // A flat tabulated signal is the same model; the quadrature route must
    // land on the closed form.
    const SignalModel tab(1.0, TabulatedForm{{0.0, 10.0}, {2.0, 2.0}});
    CHECK(hellinger(tab, array, a, b) == doctest::Approx(d * d * 0.5).epsilon(1e-7));
}

TEST_CASE("expected half likelihood ratio") {
    const auto array = testing::reference_array();
    const auto model = testing::reference_model(1.0);
    const PlanePoint theta0{0.0, 0.0};
    CHECK(expected_half_lr(model, array, theta0, {0.0, 0.0}) == 1.0);

    const PlanePoint u{0.5, 0.0};
    const double h = hellinger(model, array, theta0, theta0 + u);
    CHECK(expected_half_lr(model, array, theta0, u) ==
          doctest::Approx(std::exp(-0.5 * h)).epsilon(1e-12));

    const auto frame = direction_frame(array, theta0);
    for (std::size_t j = 0; j < 3; ++j) {
        double prev = 1.0;
        for (double t : {0.2, 0.4, 0.6, 0.8}) {
            const double v = expected_half_lr(model, array, theta0, t * frame.m[j]);
            CHECK(v <= prev + 1e-12);
            CHECK(v < 1.0);
            prev = v;
        }
    }
}

TEST_CASE("count term drops by the log ratio across an event circle") {
    const auto array = testing::reference_array();
    const auto model = testing::reference_model(1.0);
    const std::vector<EventRecord> records = {{0, {8.6}, 10.0}};
    auto count_term = [&](PlanePoint theta) {
        const double comp = model.scale_n * cumulative_signal(model, delay(array, 0, theta), 10.0);
        return log_lr(model, array, theta, records).right + comp;
    };
    const double inside = count_term({-0.0999, 0.0});   // tau < 8.6, event counted
    const double outside = count_term({-0.1001, 0.0});  // tau > 8.6, event dropped
    CHECK(inside - outside == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("field evaluator agrees with the direct operations") {
    const auto array = testing::reference_array();
    const SignalModel tab(1.0, TabulatedForm{{0.0, 1.0, 4.0, 10.0}, {2.0, 3.0, 1.0, 0.5}});
    const auto records = sample_events(tab, array, {0.2, -0.3}, SimulationSeed{5, 0});
    const LogLikelihoodField field(tab, array, records);
    std::mt19937_64 eng(99);
    for (int i = 0; i < 25; ++i) {
        const PlanePoint theta{-0.9 + 1.8 * uniform01(eng), -0.9 + 1.8 * uniform01(eng)};
        // Manual route: per-event log ratios minus the exact compensator.
        double manual = 0.0;
        for (const auto& rec : records) {
            const double tau = delay(array, rec.sensor, theta);
            for (double t : rec.times)
                if (t >= tau) manual += log_ratio(tab, tau, t);
            manual -= tab.scale_n * cumulative_signal(tab, std::min(tau, 10.0), 10.0);
        }
        const SidedValue v = field.at(theta);
        CHECK(v.right == doctest::Approx(manual).epsilon(1e-11));
        CHECK(field.right_at(theta) == doctest::Approx(v.right).epsilon(1e-13));
    }
}

TEST_CASE("hellinger Lipschitz ratio is stable in n (quick check)") {
    const auto array = testing::reference_array();
    const PlanePoint theta0{0.0, 0.0};
    const double R = 10.0;
    for (double n : {10.0, 100.0}) {
        const auto model = testing::reference_model(n);
        std::mt19937_64 eng(7);
        std::vector<double> ratios;
        for (int i = 0; i < 100; ++i) {
            const PlanePoint u{R * (uniform01(eng) - 0.5), R * (uniform01(eng) - 0.5)};
            const PlanePoint v{R * (uniform01(eng) - 0.5), R * (uniform01(eng) - 0.5)};
            const double dist = distance(u, v);
            if (dist < 1e-6) continue;
            const PlanePoint a = theta0 + (1.0 / n) * u;
            const PlanePoint b = theta0 + (1.0 / n) * v;
            ratios.push_back(hellinger(model, array, a, b) / dist);
        }
        std::vector<double> sorted = ratios;
        std::sort(sorted.begin(), sorted.end());
        const double median = sorted[sorted.size() / 2];
        for (double r : ratios) CHECK(r <= 2.0 * median);
    }
}
