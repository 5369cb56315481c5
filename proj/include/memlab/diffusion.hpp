// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// 1-D Ornstein-Uhlenbeck diffusion model: forward process
// dX = -upsilon X dt + dW with Gaussian data X(0), score learning with a
// per-knot affine model, and reverse-time sampling
// dY = (upsilon Y + score(Y, T - t)) dt + dW.
//
// The reverse drift uses the marginal score grad log p_t, not the score
// conditioned on X(0), which is unknown at generation time.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "memlab/rng.hpp"
#include "memlab/sgd.hpp"

namespace memlab {

struct OUParams {
    double upsilon = 1.0;
    double horizon = 1.0;  // T
    double dt = 1e-3;
    double data_mean = 0.0;
    double data_var = 0.25;

    void validate() const;
    std::size_t steps() const;
};

struct Gaussian1D {
    double mean = 0.0;
    double var = 1.0;
};

/// Euler-Maruyama path of length steps() + 1. noise_scale = 0 gives the
/// deterministic decay.
std::vector<double> forward_simulate(const OUParams& p, double x0, Stream& rng, double noise_scale = 1.0);

/// Law of X(t) given X(0) = x0.
Gaussian1D ou_conditional(const OUParams& p, double x0, double t);

/// Law of X(t) when X(0) follows the data law.
Gaussian1D ou_marginal(const OUParams& p, double t);

/// (mean - x) / var. Throws DegenerateVariance for var <= 0.
double analytic_score(double mean, double var, double x);

class ScoreModel {
public:
    ScoreModel(std::vector<double> knots, std::vector<double> slope, std::vector<double> intercept);
    static ScoreModel zeros(std::vector<double> knots);
    /// Knots {step, 2 step, ..., horizon} with step = horizon / count.
    static std::vector<double> uniform_knots(double horizon, std::size_t count);

    /// Piecewise-linear in t between knots, constant outside.
    double operator()(double x, double t) const;

    const std::vector<double>& knots() const noexcept { return knots_; }
    const std::vector<double>& slope() const noexcept { return slope_; }
    const std::vector<double>& intercept() const noexcept { return intercept_; }
    std::vector<double>& slope() noexcept { return slope_; }
    std::vector<double>& intercept() noexcept { return intercept_; }

private:
    std::vector<double> knots_, slope_, intercept_;
};

struct TrainingResult {
    ScoreModel model;
    std::vector<double> loss_trace;  // batch mean squared error before each update
};

/// SGD on the mean squared error against the conditional-score target, with
/// t drawn uniformly from the knots (one draw), X(0) from the data law and
/// X(t) from ou_conditional (two normals each, four draws per sample).
TrainingResult score_training_run(const OUParams& p, ScoreModel model, const StepSchedule& schedule,
                                  std::uint64_t n_iters, std::size_t batch, Stream& rng);

using ScoreFn = std::function<double(double, double)>;

/// Euler-Maruyama reverse path of length steps() + 1 starting at xT.
std::vector<double> reverse_simulate(const OUParams& p, const ScoreFn& score, double xT, Stream& rng);

/// Final value of reverse_simulate without storing the path.
double reverse_sample(const OUParams& p, const ScoreFn& score, double xT, Stream& rng);

/// Exact marginal score as a ScoreFn.
ScoreFn marginal_score(const OUParams& p);

}  // namespace memlab
