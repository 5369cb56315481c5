// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "memlab/error.hpp"
#include "memlab/estimators.hpp"
#include "memlab/landscape.hpp"
#include "memlab/noise.hpp"

using namespace memlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("gaussian smoothing is unbiased on a quadratic", "[estimators]") {
    const auto L = make_separable_quadratic({1.0, 0.5});
    const auto C = make_iid_chain({1.0});
    Stream rng(1);
    const auto curve =
        bias_curve(EstimatorKind::SmoothedGaussian, *L, *C, std::vector<double>{1.0, -2.0}, {}, {0.3, 0.1}, 200000,
                   rng);
    for (const auto& p : curve.points) CHECK(p.bias_norm < 3.0 * p.bias_se + 1e-12);
}

TEST_CASE("spsa is unbiased on a linear function", "[estimators]") {
    const auto L = make_power(1, 0.0, 3);
    const auto C = make_iid_chain({1.0});
    Stream rng(2);
    const auto curve =
        bias_curve(EstimatorKind::SpsaRademacher, *L, *C, std::vector<double>{0.5, 1.0, -1.0}, {}, {0.2}, 100000, rng);
    CHECK(curve.points[0].bias_norm < 3.0 * curve.points[0].bias_se + 1e-12);
}

TEST_CASE("quartic bias follows the smoothing formula", "[estimators]") {
    // E[(x + d xi)^4 xi] / d = 4 x^3 + 12 x d^2 for standard normal xi.
    const auto L = make_power(4, 0.0, 1);
    const auto C = make_iid_chain({1.0});
    Stream rng(3);
    const std::vector<double> deltas{0.4, 0.2};
    const auto curve = bias_curve(EstimatorKind::SmoothedGaussian, *L, *C, std::vector<double>{1.0}, {}, deltas,
                                  400000, rng);
    for (const auto& p : curve.points) {
        CHECK(std::abs(p.bias_norm - 12.0 * p.delta * p.delta) < 4.0 * p.bias_se);
    }
}

TEST_CASE("single-sample variance matches the closed form", "[estimators]") {
    // Var = x^4/d^2 + 14 x^2 + 15 d^2 for f = x^2.
    const auto L = make_power(2, 0.0, 1);
    const auto C = make_iid_chain({1.0});
    Stream rng(4);
    const double x = 3.0;
    const auto curve = bias_curve(EstimatorKind::SmoothedGaussian, *L, *C, std::vector<double>{x}, {}, {0.2, 0.05},
                                  200000, rng);
    for (const auto& p : curve.points) {
        const double v = std::pow(x, 4) / (p.delta * p.delta) + 14 * x * x + 15 * p.delta * p.delta;
        CHECK_THAT(p.variance, WithinRel(v, 0.05));
    }
}

TEST_CASE("batch averaging divides the variance", "[estimators]") {
    const auto L = make_power(2, 0.0, 1);
    const auto C = make_iid_chain({0.5, 0.5});
    const std::vector<double> x{1.0};
    auto variance = [&](std::size_t m) {
        Stream rng(5);
        EstimatorConfig cfg{EstimatorKind::SmoothedGaussian, 0.1, kInf, m};
        const int reps = 20000;
        double s = 0, q = 0;
        std::size_t z = 0;
        for (int i = 0; i < reps; ++i) {
            const auto e = averaged_estimate(*L, *C, x, {}, cfg, z, rng);
            z = e.noise_state;
            s += e.gradient[0];
            q += e.gradient[0] * e.gradient[0];
        }
        return q / reps - (s / reps) * (s / reps);
    };
    CHECK_THAT(variance(1) / variance(10), WithinRel(10.0, 0.1));
}

TEST_CASE("x-dependent chain without memory has vanishing bias", "[estimators]") {
    const auto L = make_quadratic_tracking();
    const auto C = make_logistic_chain({0.0, 3.0, 0.0, 0.0});
    Stream rng(6);
    const auto curve = bias_curve(EstimatorKind::SmoothedGaussian, *L, *C, std::vector<double>{0.2},
                                  std::vector<double>{1.0}, {0.2, 0.05}, 1000000, rng);
    CHECK(curve.points[1].bias_norm + 3.0 * curve.points[1].bias_se < curve.points[0].bias_norm / 5.0);
}

TEST_CASE("a sticky chain leaves a bias that does not vanish", "[estimators]") {
    const auto L = make_quadratic_tracking();
    const auto C = make_logistic_chain({0.6, 3.0, 0.0, 0.0});
    Stream rng(7);
    const auto curve = bias_curve(EstimatorKind::SmoothedGaussian, *L, *C, std::vector<double>{0.2},
                                  std::vector<double>{1.0}, {0.1}, 400000, rng);
    CHECK(curve.points[0].bias_norm > 5.0 * curve.points[0].bias_se);
}

TEST_CASE("clipping caps the estimate norm", "[estimators]") {
    const auto L = make_power(2, 100.0, 2);
    const auto C = make_iid_chain({1.0});
    EstimatorConfig cfg{EstimatorKind::SpsaRademacher, 0.01, 5.0, 1};
    Stream rng(8);
    for (int i = 0; i < 100; ++i) {
        const auto e = single_estimate(*L, *C, std::vector<double>{0.0, 0.0}, {}, cfg, 0, rng);
        CHECK(std::hypot(e.gradient[0], e.gradient[1]) <= 5.0 + 1e-12);
    }
}

TEST_CASE("estimator config validation", "[estimators]") {
    EstimatorConfig cfg;
    cfg.delta = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.delta = 0.1;
    cfg.batch = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("loglog slope recovers a power law", "[estimators]") {
    const std::vector<double> xs{0.1, 0.2, 0.4}, ys{0.03, 0.12, 0.48};
    CHECK_THAT(loglog_slope(xs, ys), WithinAbs(2.0, 1e-12));
}

TEST_CASE("zeroth-order descent reaches the minimum", "[estimators]") {
    const auto L = make_power(2, 0.0, 1);
    const auto C = make_iid_chain({1.0});
    EstimatorConfig cfg{EstimatorKind::SmoothedGaussian, 0.1, 1e3, 4};
    const auto rec = run_with_estimator(L, C, StepSchedule::constant(0.005, 0.1), cfg, {2.0}, {}, 20000, 9, 100);
    double tail = 0.0;
    int m = 0;
    for (std::size_t i = rec.size() / 2; i < rec.size(); ++i, ++m) tail += rec.x_at(i);
    CHECK(std::abs(tail / m) < 0.1);
}
