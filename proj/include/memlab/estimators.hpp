// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// Single-evaluation gradient estimators under Markov noise. Each estimate
// draws a perturbation xi, moves the noise one step with the kernel at the
// perturbed point x + delta*xi, and scales f(x + delta*xi, eps*y, Z) by
// xi / delta (Gaussian smoothing) or 1 / (delta*xi_i) (SPSA).
//
// With a noise chain that has memory the limit as delta -> 0 is
// sum_z pi grad f + pi^T dP f rather than the gradient of phi; the two
// coincide for memoryless kernels.

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "memlab/landscape.hpp"
#include "memlab/noise.hpp"
#include "memlab/rng.hpp"
#include "memlab/sgd.hpp"

namespace memlab {

enum class EstimatorKind { SmoothedGaussian, SpsaRademacher };

struct EstimatorConfig {
    EstimatorKind kind = EstimatorKind::SmoothedGaussian;
    double delta = 0.1;
    double clip_norm = 1e3;  // infinity disables clipping
    std::size_t batch = 1;

    void validate() const;
};

struct Estimate {
    std::vector<double> gradient;
    std::size_t noise_state = 0;
};

/// Draws 2*s uniforms for xi and one for the noise step.
Estimate smoothed_grad_estimate(const Landscape& L, const ControlledChain& C, std::span<const double> x,
                                std::span<const double> y, const EstimatorConfig& cfg, std::size_t noise_state,
                                Stream& rng);

/// Draws s uniforms for xi and one for the noise step.
Estimate spsa_grad_estimate(const Landscape& L, const ControlledChain& C, std::span<const double> x,
                            std::span<const double> y, const EstimatorConfig& cfg, std::size_t noise_state,
                            Stream& rng);

Estimate single_estimate(const Landscape& L, const ControlledChain& C, std::span<const double> x,
                         std::span<const double> y, const EstimatorConfig& cfg, std::size_t noise_state,
                         Stream& rng);

/// Mean of cfg.batch sequential estimates along one noise chain.
Estimate averaged_estimate(const Landscape& L, const ControlledChain& C, std::span<const double> x,
                           std::span<const double> y, const EstimatorConfig& cfg, std::size_t noise_state,
                           Stream& rng);

struct BiasPoint {
    double delta = 0.0;
    double bias_norm = 0.0;
    double bias_se = 0.0;    // Monte-Carlo standard error of the bias norm
    double variance = 0.0;   // trace of the per-estimate covariance
};

struct BiasCurve {
    std::vector<BiasPoint> points;
    double slope = 0.0;  // least-squares slope of log bias vs log delta
};

/// For each delta, `samples` single estimates along one chain (one
/// substream per delta) compared with averaged_grads(full).g1.
BiasCurve bias_curve(EstimatorKind kind, const Landscape& L, const ControlledChain& C, std::span<const double> x,
                     std::span<const double> y, const std::vector<double>& deltas, std::size_t samples,
                     Stream& rng, double clip_norm = std::numeric_limits<double>::infinity());

/// Least-squares slope of log(ys) against log(xs).
double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys);

/// Instantaneous two-scale SGD with the x-gradient replaced by an averaged
/// estimate; y uses the exact grad2 at the post-estimate noise state.
TrajectoryRecord run_with_estimator(const LandscapePtr& L, const ChainPtr& C, const StepSchedule& s,
                                    const EstimatorConfig& cfg, std::vector<double> x0, std::vector<double> y0,
                                    std::uint64_t n_steps, std::uint64_t seed, std::size_t thin = 1);

}  // namespace memlab
