// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "memlab/error.hpp"
#include "memlab/landscape.hpp"
#include "memlab/noise.hpp"

using namespace memlab;
using Catch::Matchers::WithinAbs;

namespace {

// Stationary law by repeated squaring of the kernel.
Eigen::VectorXd power_limit(const Eigen::MatrixXd& P) {
    Eigen::MatrixXd Q = P;
    for (int i = 0; i < 40; ++i) {
        Q = Q * Q;
        for (Eigen::Index r = 0; r < Q.rows(); ++r) Q.row(r) /= Q.row(r).sum();
    }
    return Q.row(0).transpose();
}

double loss_oracle(const Landscape& L, const ControlledChain& C, const std::vector<double>& x,
                   const std::vector<double>& y) {
    const Eigen::VectorXd pi = power_limit(C.kernel(x, y));
    double s = 0.0;
    for (Eigen::Index z = 0; z < pi.size(); ++z) s += pi(z) * L.eval(x, y, static_cast<std::size_t>(z));
    return s;
}

}  // namespace

TEST_CASE("flip chain stationary law has the closed form", "[noise]") {
    const auto C = make_flip_chain(0.2, 0.6);
    const auto pi = stationary_distribution(*C, {}, {});
    CHECK_THAT(pi[0], WithinAbs(0.75, 1e-14));
    CHECK_THAT(pi[1], WithinAbs(0.25, 1e-14));
}

TEST_CASE("stationary residuals are tiny for every chain", "[noise]") {
    const std::vector<ChainPtr> chains{make_flip_chain(0.3, 0.3), make_iid_chain({0.2, 0.3, 0.5}),
                                       make_logistic_chain({0.5, 5.0, 0.0, 0.0}),
                                       make_logistic_chain({0.2, 2.0, 1.0, 0.3}), make_memorization_chain()};
    for (const auto& C : chains) {
        for (double xv : {-1.3, 0.0, 0.4, 2.0}) {
            const std::vector<double> x{xv}, y{0.5};
            const auto pi = stationary_distribution(*C, x, y);
            INFO(C->name() << " x=" << xv);
            CHECK(stationary_residual(*C, x, y, pi) < 1e-10);
            const Eigen::VectorXd ref = power_limit(C->kernel(x, y));
            for (std::size_t i = 0; i < pi.support_size(); ++i) CHECK_THAT(pi[i], WithinAbs(ref(i), 1e-10));
        }
    }
}

TEST_CASE("reducible chains are rejected", "[noise]") {
    const auto C = make_flip_chain(0.0, 0.0);
    try {
        stationary_distribution(*C, {}, {});
        FAIL("expected NotIrreducible");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::NotIrreducible);
    }
}

TEST_CASE("large chains use the iterative path", "[noise]") {
    const std::size_t n = 257;
    const auto C = make_function_chain(
        "ring", n,
        [n](std::span<const double>, std::span<const double>) {
            Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
            for (std::size_t i = 0; i < n; ++i) {
                P(i, i) = 0.5;
                P(i, (i + 1) % n) = 0.3;
                P(i, (i + n - 1) % n) = 0.2;
            }
            return P;
        },
        false);
    const auto pi = stationary_distribution(*C, {}, {});
    for (std::size_t i = 0; i < n; ++i) CHECK_THAT(pi[i], WithinAbs(1.0 / n, 1e-12));
    CHECK(stationary_residual(*C, {}, {}, pi) < 1e-10);
}

TEST_CASE("rows are probability vectors", "[noise]") {
    const auto C = make_memorization_chain(0.3, 4.0);
    const std::vector<double> x{0.8}, y{};
    const Eigen::MatrixXd P = C->kernel(x, y);
    CHECK(P.rows() == 4);
    for (Eigen::Index i = 0; i < 4; ++i) CHECK_THAT(P.row(i).sum(), WithinAbs(1.0, 1e-15));
    CHECK(P.minCoeff() >= 0.0);
}

TEST_CASE("kernel derivatives match finite differences", "[noise]") {
    const std::vector<ChainPtr> chains{make_logistic_chain({0.2, 2.0, 1.5, 0.3}), make_memorization_chain()};
    for (const auto& C : chains) {
        REQUIRE(C->has_kernel_derivative());
        const std::vector<double> x{0.3}, y{0.7};
        const double h = 1e-6;
        Eigen::MatrixXd D;
        C->kernel_derivative(x, y, 0, D);
        const Eigen::MatrixXd fd =
            (C->kernel(std::vector<double>{x[0] + h}, y) - C->kernel(std::vector<double>{x[0] - h}, y)) / (2 * h);
        CHECK((D - fd).cwiseAbs().maxCoeff() < 1e-7);
    }
}

TEST_CASE("noise_step follows the row", "[noise]") {
    const auto C = make_iid_chain({0.1, 0.9});
    Stream rng(4);
    const int n = 100000;
    int ones = 0;
    for (int i = 0; i < n; ++i) ones += noise_step(*C, {}, {}, 0, rng) == 1;
    CHECK(std::abs(ones / static_cast<double>(n) - 0.9) < 5 * std::sqrt(0.09 / n));
}

TEST_CASE("averaged loss matches the power-limit oracle", "[noise]") {
    const auto L = make_memorization_drift();
    const auto C = make_memorization_chain();
    for (double xv : {-1.0, 0.2, 1.1}) {
        const std::vector<double> x{xv}, y{3.0};
        CHECK_THAT(averaged_loss(*L, *C, x, y), WithinAbs(loss_oracle(*L, *C, x, y), 1e-10));
    }
}

TEST_CASE("full averaged gradient is the derivative of the averaged loss", "[noise]") {
    struct Case {
        LandscapePtr L;
        ChainPtr C;
    };
    const std::vector<Case> cases{
        {make_memorization_drift(), make_memorization_chain()},
        {make_quadratic_tracking(), make_logistic_chain({0.3, 3.0, 0.5, 0.1})},
        {make_quadratic_tracking({1.0, 0.1, 0.5, 0.2}), make_flip_chain(0.2, 0.4)},
    };
    const double h = 1e-5;
    for (const auto& c : cases) {
        for (double xv : {-0.8, 0.3, 1.2}) {
            const std::vector<double> x{xv}, y{2.0};
            const auto g = averaged_grads(*c.L, *c.C, x, y, GradMode::Full);
            const double dx = (loss_oracle(*c.L, *c.C, {xv + h}, y) - loss_oracle(*c.L, *c.C, {xv - h}, y)) / (2 * h);
            const double dy = (loss_oracle(*c.L, *c.C, x, {2.0 + h}) - loss_oracle(*c.L, *c.C, x, {2.0 - h})) /
                              (2 * h * c.L->epsilon());
            INFO(c.L->name() << " / " << c.C->name() << " x=" << xv);
            CHECK_THAT(g.g1[0], WithinAbs(dx, 1e-6 * std::max(1.0, std::abs(dx))));
            CHECK_THAT(g.g2[0], WithinAbs(dy, 1e-5 * std::max(1.0, std::abs(dy))));
        }
    }
}

TEST_CASE("frozen gradient averages the instantaneous gradient", "[noise]") {
    const auto L = make_memorization_drift();
    const auto C = make_memorization_chain();
    const std::vector<double> x{0.6}, y{1.0};
    const Eigen::VectorXd pi = power_limit(C->kernel(x, y));
    double g1 = 0.0, g2 = 0.0;
    for (std::size_t z = 0; z < 4; ++z) {
        g1 += pi(z) * L->grad1(x, y, z)[0];
        g2 += pi(z) * L->grad2(x, y, z)[0];
    }
    const auto g = averaged_grads(*L, *C, x, y, GradMode::Frozen);
    CHECK_THAT(g.g1[0], WithinAbs(g1, 1e-12));
    CHECK_THAT(g.g2[0], WithinAbs(g2, 1e-12));
}

TEST_CASE("chains without derivatives fall back to finite differences", "[noise]") {
    const auto L = make_quadratic_tracking();
    const auto C = make_function_chain(
        "smooth", 2,
        [](std::span<const double> x, std::span<const double>) {
            const double p = 0.5 + 0.3 * std::tanh(x[0]);
            Eigen::MatrixXd P(2, 2);
            P << 1 - p, p, 1 - p, p;
            return P;
        },
        true);
    const std::vector<double> x{0.4}, y{1.0};
    const double h = 1e-5;
    const auto g = averaged_grads(*L, *C, x, y, GradMode::Full);
    const double dx = (loss_oracle(*L, *C, {0.4 + h}, y) - loss_oracle(*L, *C, {0.4 - h}, y)) / (2 * h);
    CHECK_THAT(g.g1[0], WithinAbs(dx, 1e-6));
}
