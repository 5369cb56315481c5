// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "memlab/error.hpp"
#include "memlab/landscape.hpp"
#include "memlab/rng.hpp"

using namespace memlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<LandscapePtr> builtins() {
    QuadraticTrackingParams qc;
    qc.confinement = 0.5;
    qc.target = 0.2;
    return {make_quadratic_tracking(),       make_quadratic_tracking(qc),
            make_symmetric_double_well(),    make_symmetric_double_well({0.005, std::sqrt(0.02)}),
            make_curvature_asymmetric_well(), make_memorization_drift(),
            make_power(4, 0.0, 1),           make_power(2, 1.0, 3),
            make_separable_quadratic({1.0, 2.5, 0.1})};
}

double V(const Landscape& L, double x) {
    const std::vector<double> xs{x};
    return L.eval(xs, {}, 0);
}

double second_difference(const Landscape& L, double x, double h) {
    return (V(L, x + h) - 2 * V(L, x) + V(L, x - h)) / (h * h);
}

}  // namespace

TEST_CASE("analytic gradients match finite differences on every built-in", "[landscape]") {
    Stream rng(1);
    for (const auto& L : builtins()) {
        INFO(L->name());
        CHECK(fd_check(*L, 200, 1e-5, rng) < 1e-6);
    }
}

TEST_CASE("cubic branches solve the cubic", "[landscape]") {
    const double crit = 2.0 / (3.0 * std::sqrt(3.0));
    for (double c : {-0.38, -0.2, 0.0, 0.1, 0.3, 0.38}) {
        const auto [lo, hi] = cubic_branches(c);
        REQUIRE_FALSE(std::isnan(lo));
        REQUIRE_FALSE(std::isnan(hi));
        CHECK_THAT(lo * lo * lo - lo - c, WithinAbs(0.0, 1e-12));
        CHECK_THAT(hi * hi * hi - hi - c, WithinAbs(0.0, 1e-12));
        CHECK(lo < -1.0 / std::sqrt(3.0));
        CHECK(hi > 1.0 / std::sqrt(3.0));
    }
    const auto [l0, h0] = cubic_branches(0.0);
    CHECK_THAT(l0, WithinAbs(-1.0, 1e-14));
    CHECK_THAT(h0, WithinAbs(1.0, 1e-14));
    CHECK(std::isnan(cubic_branches(crit + 0.01).first));
    CHECK_FALSE(std::isnan(cubic_branches(crit + 0.01).second));
    CHECK(std::isnan(cubic_branches(-crit - 0.01).second));
}

TEST_CASE("symmetric double well metadata matches a grid scan", "[landscape]") {
    const auto L = make_symmetric_double_well({0.7, 1.3});
    double best = 1e300, arg = 0.0;
    for (int i = 0; i <= 20000; ++i) {
        const double x = 0.01 + 2.59 * i / 20000.0;
        if (V(*L, x) < best) {
            best = V(*L, x);
            arg = x;
        }
    }
    const auto mins = L->minima();
    REQUIRE(mins.size() == 2);
    CHECK_THAT(mins[1].location[0], WithinAbs(arg, 2e-4));
    CHECK_THAT(mins[1].hessian_eigenvalues[0], WithinRel(second_difference(*L, 1.3, 1e-4), 1e-5));
    CHECK_THAT(V(*L, -0.4), WithinAbs(V(*L, 0.4), 1e-15));
    CHECK(L->saddles() == std::vector<double>{0.0});
}

TEST_CASE("curvature asymmetric well has the requested curvatures", "[landscape]") {
    const auto L = make_curvature_asymmetric_well();
    const auto mins = L->minima();
    REQUIRE(mins.size() == 2);
    CHECK_THAT(V(*L, mins[0].location[0]), WithinAbs(0.0, 1e-14));
    CHECK_THAT(V(*L, mins[1].location[0]), WithinAbs(0.0, 1e-14));
    CHECK_THAT(second_difference(*L, mins[0].location[0], 1e-4), WithinRel(2.0, 1e-6));
    CHECK_THAT(second_difference(*L, mins[1].location[0], 1e-4), WithinRel(8.0, 1e-6));
    CHECK(mins[0].hessian_eigenvalues == std::vector<double>{2.0});
    CHECK(mins[1].hessian_eigenvalues == std::vector<double>{8.0});

    // Second derivative is continuous across both joins.
    for (double j : {-0.01, 0.01}) {
        CHECK_THAT(second_difference(*L, j - 2e-6, 1e-6), WithinAbs(second_difference(*L, j + 2e-6, 1e-6), 0.2));
    }
    const auto s = L->saddles();
    REQUIRE(s.size() == 1);
    CHECK(s[0] > mins[0].location[0]);
    CHECK(s[0] < mins[1].location[0]);
    CHECK(V(*L, s[0]) >= V(*L, s[0] + 1e-4));
    CHECK(V(*L, s[0]) >= V(*L, s[0] - 1e-4));
    CHECK(L->curvature_bound() >= 8.0);
}

TEST_CASE("memorization drift branches zero the noise-free force", "[landscape]") {
    const auto L = make_memorization_drift();
    const std::vector<double> y{2.0};
    for (std::size_t i = 0; i < 2; ++i) {
        std::vector<double> x(1);
        REQUIRE(L->branch(i, y, x));
        // z2 enters linearly with mean zero under a fair coin.
        const double g = 0.5 * (L->grad1(x, y, 0)[0] + L->grad1(x, y, 1)[0]);
        CHECK_THAT(g, WithinAbs(0.0, 1e-12));
    }
    std::vector<double> x(1);
    CHECK_FALSE(L->branch(0, std::vector<double>{30.0}, x));
}

TEST_CASE("quadratic tracking branch is the averaged minimizer", "[landscape]") {
    const auto L = make_quadratic_tracking();
    const std::vector<double> y{3.0};
    std::vector<double> x(1);
    REQUIRE(L->branch(0, y, x));
    CHECK_THAT(x[0], WithinAbs(0.3, 1e-15));
    CHECK_THAT(L->grad1(x, y, 0)[0] + L->grad1(x, y, 1)[0], WithinAbs(0.0, 1e-14));
}

TEST_CASE("argument checks", "[landscape]") {
    const auto L = make_quadratic_tracking();
    const std::vector<double> x{0.0}, y{0.0}, two{0.0, 0.0};
    CHECK_THROWS_AS(L->eval(two, y, 0), Error);
    CHECK_THROWS_AS(L->eval(x, {}, 0), Error);
    CHECK_THROWS_AS(L->eval(x, y, 2), Error);
    CHECK_THROWS_AS(make_quadratic_tracking({1.0, 0.5, 0.0, 0.0}), Error);
    CHECK_THROWS_AS(make_quadratic_tracking({1.0, 0.0, 0.0, 0.0}), Error);
    CHECK_THROWS_AS(make_symmetric_double_well({-1.0, 1.0}), Error);
    CHECK_THROWS_AS(make_power(0), Error);
}

TEST_CASE("with_epsilon changes only the scale", "[landscape]") {
    const auto L = make_memorization_drift();
    const auto M = L->with_epsilon(0.1);
    CHECK(M->epsilon() == 0.1);
    const std::vector<double> x{0.7};
    CHECK(L->eval(x, std::vector<double>{5.0}, 3) == M->eval(x, std::vector<double>{1.0}, 3));
}
