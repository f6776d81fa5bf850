#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "poissonloc/estimators.hpp"

using namespace poissonloc;

TEST_CASE("constant likelihood posterior is the centroid") {
    const auto array = testing::reference_array();
    const SignalModel zero(1.0, TabulatedForm{{0.0, 10.0}, {0.0, 0.0}});
    const auto records = sample_events(zero, array, {0.0, 0.0}, SimulationSeed{1, 0});
    const auto result = bayes_estimate(zero, array, records, Prior::uniform());
    CHECK(std::abs(result.estimate.x) < 1e-10);
    CHECK(std::abs(result.estimate.y) < 1e-10);
}

TEST_CASE("two-stage estimate equals the dense single-stage oracle") {
    const auto array = testing::reference_array();
    for (double n : {10.0, 50.0}) {
        const auto model = testing::reference_model(n);
        const auto records = sample_events(model, array, {0.0, 0.0},
                                           SimulationSeed{404, static_cast<std::uint64_t>(n)});
        const auto fast = bayes_estimate(model, array, records, Prior::uniform());
        BayesGridPolicy dense;
        dense.single_stage = true;
        const auto oracle = bayes_estimate(model, array, records, Prior::uniform(), dense);
        CHECK(std::abs(fast.estimate.x - oracle.estimate.x) < 1e-6);
        CHECK(std::abs(fast.estimate.y - oracle.estimate.y) < 1e-6);
        CHECK(fast.diagnostics.boundary_mass_fraction < 1e-6);
    }
}

TEST_CASE("posterior mean matches the closed-form product weight") {
    const auto array = testing::reference_array();
    const auto model = testing::reference_model(20.0);
    const auto records = sample_events(model, array, {0.0, 0.0}, SimulationSeed{77, 3});
    const auto direct = bayes_estimate(model, array, records, Prior::uniform());

    // Product form: (1 + l1/l0)^{-X_j(tau_j)} exp(n l1 sum tau_j), equal to
    // the likelihood ratio up to a theta-free factor.
    const double ell = model.log_jump();
    const double n_l1 = model.scale_n * 2.0;
    const double log_prior = -std::log(array.theta_box.area());
    auto closed = [&](PlanePoint theta) {
        double w = 0.0;
        for (const auto& rec : records) {
            const double tau = delay(array, rec.sensor, theta);
            const auto before =
                std::lower_bound(rec.times.begin(), rec.times.end(), tau) - rec.times.begin();
            w += -ell * static_cast<double>(before) + n_l1 * tau;
        }
        return w + log_prior;
    };
    const auto product = bayes_from_log_weight(array, model.scale_n, model.jump_value(), closed,
                                               BayesGridPolicy{});
    CHECK(product.estimate.x == doctest::Approx(direct.estimate.x).epsilon(1e-12));
    CHECK(product.estimate.y == doctest::Approx(direct.estimate.y).epsilon(1e-12));
}

TEST_CASE("unnormalized flat density reproduces the uniform prior") {
    const auto array = testing::reference_array();
    const auto model = testing::reference_model(10.0);
    const auto records = sample_events(model, array, {0.0, 0.0}, SimulationSeed{8, 1});
    const auto uniform = bayes_estimate(model, array, records, Prior::uniform());
    const auto flat = bayes_estimate(model, array, records,
                                     Prior::density([](PlanePoint) { return 2.5; }));
    CHECK(uniform.estimate.x == doctest::Approx(flat.estimate.x).epsilon(1e-12));
    CHECK(uniform.estimate.y == doctest::Approx(flat.estimate.y).epsilon(1e-12));

    CHECK_THROWS_AS(
        bayes_estimate(model, array, records, Prior::density([](PlanePoint p) { return p.x; })),
        DomainError);
}

TEST_CASE("degenerate mass when the rectangle sits inside an exclusion ball") {
    const SensorArray tiny({{0.0, 0.0}, {5.0, 0.0}, {0.0, 5.0}}, 1.0, 0.5,
                           ParameterRectangle{-0.01, 0.01, -0.01, 0.01}, 10.0);
    const auto model = testing::reference_model(1.0);
    const std::vector<EventRecord> records = {{0, {}, 10.0}, {1, {}, 10.0}, {2, {}, 10.0}};
    CHECK_THROWS_AS(bayes_estimate(model, tiny, records, Prior::uniform()), DegenerateMass);
}

TEST_CASE("MLE recovers a source placed on three event circles") {
    const auto array = testing::reference_array();
    const auto model = testing::reference_model(1.0);
    const PlanePoint star{0.3, -0.2};
    std::vector<EventRecord> records;
    for (std::size_t j = 0; j < 3; ++j)
        records.push_back({j, {delay(array, j, star)}, 10.0});
    const auto result = mle_estimate(model, array, records);
    CHECK(result.estimate.x == doctest::Approx(star.x).epsilon(1e-9));
    CHECK(result.estimate.y == doctest::Approx(star.y).epsilon(1e-9));
    CHECK(result.diagnostics.right_limit_attained);
}

TEST_CASE("MLE with no events maximizes the total delay") {
    const auto array = testing::reference_array();
    const auto model = testing::reference_model(1.0);
    const std::vector<EventRecord> records = {{0, {}, 10.0}, {1, {}, 10.0}, {2, {}, 10.0}};
    const auto result = mle_estimate(model, array, records);

    // Dense-grid oracle for the argmax of the compensator-only objective.
    const LogLikelihoodField field(model, array, records);
    PlanePoint best{0.0, 0.0};
    double best_v = -1e300;
    const int g = 501;
    for (int i = 0; i < g; ++i)
        for (int k = 0; k < g; ++k) {
            const PlanePoint p{-1.0 + 2.0 * (i + 0.5) / g, -1.0 + 2.0 * (k + 0.5) / g};
            const double v = field.right_at(p);
            if (v > best_v) {
                best_v = v;
                best = p;
            }
        }
    CHECK(std::abs(result.estimate.x - best.x) < 2.0 * 2.0 / g + 1e-6);
    CHECK(std::abs(result.estimate.y - best.y) < 2.0 * 2.0 / g + 1e-6);
    CHECK(field.right_at(result.estimate) >= best_v - 1e-12);
}

TEST_CASE("events outside the delay window never move the argmax") {
    const auto array = testing::reference_array();
    const auto model = testing::reference_model(5.0);
    auto records = sample_events(model, array, {0.0, 0.0}, SimulationSeed{2222, 0});
    const auto base = mle_estimate(model, array, records);
    // Late events are counted at every theta in the rectangle, shifting the
    // whole objective by a constant.
    for (auto& rec : records) rec.times.push_back(9.99);
    const auto shifted = mle_estimate(model, array, records);
    CHECK(shifted.estimate.x == doctest::Approx(base.estimate.x).epsilon(1e-12));
    CHECK(shifted.estimate.y == doctest::Approx(base.estimate.y).epsilon(1e-12));
}

TEST_CASE("arrival-time estimator candidate evaluation") {
    const auto model = testing::reference_model(1.0);
    CHECK(estimate_arrival(model, {0, {3.0, 5.0}, 10.0}) == doctest::Approx(10.0));
    CHECK(estimate_arrival(model, {0, {}, 10.0}) == doctest::Approx(10.0));

    // Dense post-arrival cluster at the plausible rate: the candidate value
    // decreases along the cluster (l < n lambda1 * spacing fails), so the
    // first cluster event wins.
    const auto strong = testing::reference_model(200.0);
    std::vector<double> times;
    for (int i = 0; i < 2000; ++i) times.push_back(6.0 + 0.002 * i);
    const double tau_hat = estimate_arrival(strong, {0, times, 10.0});
    CHECK(tau_hat == doctest::Approx(6.0).epsilon(1e-12));

    const SignalModel tab(1.0, TabulatedForm{{0.0, 10.0}, {2.0, 2.0}});
    CHECK_THROWS_AS(estimate_arrival(tab, {0, {1.0}, 10.0}), FormError);
}

TEST_CASE("trilateration inverts exact delays") {
    const auto array = testing::reference_array();
    for (int i = 0; i < 10; ++i)
        for (int k = 0; k < 10; ++k) {
            const PlanePoint truth{-0.9 + 1.8 * i / 9.0, -0.9 + 1.8 * k / 9.0};
            std::vector<double> taus;
            for (std::size_t j = 0; j < 3; ++j) taus.push_back(delay(array, j, truth));
            const auto result = trilaterate(array, taus);
            CHECK(std::abs(result.estimate.x - truth.x) < 1e-9);
            CHECK(std::abs(result.estimate.y - truth.y) < 1e-9);
            CHECK(result.diagnostics.condition_number < 100.0);
        }
}

TEST_CASE("perturbed trilateration matches the explicit linear solve") {
    const auto array = testing::reference_array();
    const PlanePoint truth{0.0, 0.0};
    std::vector<double> taus;
    for (std::size_t j = 0; j < 3; ++j) taus.push_back(delay(array, j, truth));
    taus[0] += 0.01;
    const auto result = trilaterate(array, taus);

    // Cramer solve of the two subtracted equations (exactly determined).
    const auto& s = array.sensors;
    double a[2][2], b[2];
    for (int j = 1; j <= 2; ++j) {
        a[j - 1][0] = 2.0 * (s[j].x - s[0].x);
        a[j - 1][1] = 2.0 * (s[j].y - s[0].y);
        b[j - 1] = dot(s[j], s[j]) - dot(s[0], s[0]) -
                   (taus[j] * taus[j] - taus[0] * taus[0]) * array.nu * array.nu;
    }
    const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    const PlanePoint oracle{(b[0] * a[1][1] - a[0][1] * b[1]) / det,
                            (a[0][0] * b[1] - b[0] * a[1][0]) / det};
    CHECK(result.estimate.x == doctest::Approx(oracle.x).epsilon(1e-9));
    CHECK(result.estimate.y == doctest::Approx(oracle.y).epsilon(1e-9));
    CHECK(distance(result.estimate, truth) > 1e-4);  // the perturbation moved it
}

TEST_CASE("collinear sensors are singular for trilateration") {
    const SensorArray collinear({{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}}, 1.0, 0.01,
                                ParameterRectangle{-1.0, 1.0, -1.0, 1.0}, 10.0);
    const std::vector<double> taus = {1.0, 1.5, 2.5};
    CHECK_THROWS_AS(trilaterate(collinear, taus), SingularGeometry);
}
