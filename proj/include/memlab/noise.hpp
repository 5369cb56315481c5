// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// Controlled Markov noise on a finite state space. The kernel P(x, y) is
// row-stochastic and may depend on the iterate; its stationary law pi(x, y)
// defines the averaged loss phi(x, y) = sum_z pi(z) f(x, eps*y, z).

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "memlab/landscape.hpp"
#include "memlab/measure.hpp"
#include "memlab/rng.hpp"

namespace memlab {

class ControlledChain {
public:
    virtual ~ControlledChain() = default;

    virtual std::string name() const = 0;
    virtual std::size_t n_states() const = 0;

    /// Row `from` of P(x, y) written to out (size n_states()).
    virtual void row(std::span<const double> x, std::span<const double> y, std::size_t from,
                     std::span<double> out) const = 0;

    /// False when P does not depend on (x, y); then frozen and full agree.
    virtual bool parameter_dependent() const { return true; }
    /// False forbids full-mode gradients altogether.
    virtual bool differentiable() const { return true; }
    /// True when kernel_derivative is implemented analytically.
    virtual bool has_kernel_derivative() const { return false; }
    /// dP/d(theta_j) where theta = (x_0..x_{s-1}, y_0..y_{r-1}).
    virtual void kernel_derivative(std::span<const double> x, std::span<const double> y, std::size_t param,
                                   Eigen::MatrixXd& out) const;

    Eigen::MatrixXd kernel(std::span<const double> x, std::span<const double> y) const;
};

using ChainPtr = std::shared_ptr<const ControlledChain>;

/// Two states with P(0 -> 1) = alpha, P(1 -> 0) = beta.
ChainPtr make_flip_chain(double alpha, double beta);

/// Every row equals pi (memoryless).
ChainPtr make_iid_chain(std::vector<double> pi);

/// Two states (index 1 <-> z = +1). With probability `stay` the state is
/// kept, otherwise resampled with P(1) = q = (1 + tanh(beta_x*x_0 +
/// beta_y*y_0 + bias)) / 2. Stationary law is (1 - q, q) for any stay < 1.
struct LogisticChainParams {
    double stay = 0.5;
    double beta_x = 5.0;
    double beta_y = 0.0;
    double bias = 0.0;
};
ChainPtr make_logistic_chain(const LogisticChainParams& p);

/// Independent product; state index = i_a * n_b + i_b.
ChainPtr make_product_chain(ChainPtr a, ChainPtr b);

/// Product(Logistic(stay, beta_x = beta), fair IID): the noise paired with
/// MemorizationDrift.
ChainPtr make_memorization_chain(double stay = 0.5, double beta = 5.0);

/// Chain from a kernel callback; the optional derivative callback enables
/// the analytic full gradient.
using KernelFn = std::function<Eigen::MatrixXd(std::span<const double>, std::span<const double>)>;
using KernelDerivFn =
    std::function<Eigen::MatrixXd(std::span<const double>, std::span<const double>, std::size_t)>;
ChainPtr make_function_chain(std::string name, std::size_t n_states, KernelFn kernel, bool parameter_dependent,
                             KernelDerivFn derivative = {}, bool differentiable = true);

/// Next state from row `state` of P(x, y); one uniform draw.
std::size_t noise_step(const ControlledChain& C, std::span<const double> x, std::span<const double> y,
                       std::size_t state, Stream& rng);

/// Unique pi with pi^T P = pi^T: dense solve for k <= 200, power iteration
/// above. Throws NotIrreducible when it is not unique or the residual
/// exceeds 1e-10.
DiscreteMeasure stationary_distribution(const ControlledChain& C, std::span<const double> x,
                                        std::span<const double> y);

/// Infinity-norm residual |pi^T P - pi^T|.
double stationary_residual(const ControlledChain& C, std::span<const double> x, std::span<const double> y,
                           const DiscreteMeasure& pi);

double averaged_loss(const Landscape& L, const ControlledChain& C, std::span<const double> x,
                     std::span<const double> y);

enum class GradMode { Frozen, Full };

struct AveragedGrads {
    std::vector<double> g1;  // d/dx
    std::vector<double> g2;  // d/du, u = eps*y
};

/// Frozen: sum_z pi(z) grad_k f(., z). Full: gradient of phi itself, i.e.
/// frozen plus sum_z f(z) d pi(z), with d pi from the differentiated
/// stationarity equation (central differences with h = 1e-5 when the chain
/// has no analytic kernel derivative).
AveragedGrads averaged_grads(const Landscape& L, const ControlledChain& C, std::span<const double> x,
                             std::span<const double> y, GradMode mode);

}  // namespace memlab
