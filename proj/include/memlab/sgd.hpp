// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// Two-time-scale SGD with Markov noise:
//   x_{n+1} = x_n - a_n grad1 f(x_n, eps*y_n, Z_n)
//   y_{n+1} = y_n - b_n grad2 f(x_n, eps*y_n, Z_n)
// with b = eps*a for constant steps. Also the single-scale model with
// additive isotropic Gaussian noise and the reference slow-fast ODE.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "memlab/error.hpp"
#include "memlab/landscape.hpp"
#include "memlab/noise.hpp"
#include "memlab/rng.hpp"

namespace memlab {

struct StepSchedule {
    enum class Kind { Constant, Decreasing };

    Kind kind = Kind::Constant;
    double a = 0.01;        // Constant
    double epsilon = 0.1;   // Constant: b = epsilon * a
    double c_a = 1.0;       // Decreasing: a_n = c_a / (n + 1)^q
    double c_b = 1.0;       //             b_n = c_b / (n + 1)^p
    double q = 1.0;
    double p = 1.5;

    static StepSchedule constant(double a, double epsilon);
    static StepSchedule decreasing(double c_a, double c_b, double q, double p);

    double fast(std::uint64_t n) const;
    double slow(std::uint64_t n) const;
    std::string describe() const;
};

struct ScheduleReport {
    bool robbins_monro = false;
    bool timescale_separated = false;
    std::vector<std::string> reasons;
};

/// Series tests on the exponents: sum n^-e diverges iff e <= 1 and sum
/// n^-2e converges iff e > 1/2.
ScheduleReport validate_schedule(const StepSchedule& s);

struct TwoScaleState {
    std::vector<double> x;
    std::vector<double> y;
    std::size_t noise_state = 0;
    std::uint64_t n = 0;
};

enum class SgdMode { Instantaneous, AveragedFull, AveragedFrozen };

std::string_view mode_name(SgdMode mode);

struct TrajectoryRecord {
    std::string landscape, chain, schedule, mode;
    std::size_t thin = 1;
    std::uint64_t seed = 0;
    std::size_t dim_x = 0, dim_y = 0;
    std::vector<std::uint64_t> n;
    std::vector<double> x;  // row-major, dim_x per record
    std::vector<double> y;  // row-major, dim_y per record
    std::vector<double> loss;
    std::vector<std::size_t> noise_state;

    std::size_t size() const noexcept { return n.size(); }
    double x_at(std::size_t i, std::size_t d = 0) const { return x[i * dim_x + d]; }
    double y_at(std::size_t i, std::size_t d = 0) const { return y[i * dim_y + d]; }
    void push(const TwoScaleState& st, double loss_value);

    /// Header `n,x0..,y0..,loss,noise_state`.
    std::string to_csv() const;
};

/// NonFiniteIterate carrying the record up to the failing step.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, TrajectoryRecord partial)
        : Error(Errc::NonFiniteIterate, what), partial_(std::move(partial)) {}
    const TrajectoryRecord& partial() const noexcept { return partial_; }

private:
    TrajectoryRecord partial_;
};

inline constexpr double kDivergenceBound = 1e8;

/// In-place step. Instantaneous mode consumes one noise draw; averaged modes
/// consume none and leave noise_state unchanged. Throws NonFiniteIterate.
void advance(TwoScaleState& st, const Landscape& L, const ControlledChain& C, const StepSchedule& s, SgdMode mode,
             Stream& rng);

TwoScaleState sgd_step(const TwoScaleState& st, const Landscape& L, const ControlledChain& C, const StepSchedule& s,
                       SgdMode mode, Stream& rng);

struct RunOptions {
    std::size_t thin = 1;
    bool record_loss = true;  // loss = phi(x, y); NaN when disabled
    std::size_t initial_noise_state = 0;
};

/// Records the initial state and every thin-th state after it; the stream
/// is Stream(seed). Throws DivergenceError.
TrajectoryRecord run(const LandscapePtr& L, const ChainPtr& C, const StepSchedule& s, SgdMode mode,
                     std::vector<double> x0, std::vector<double> y0, std::uint64_t n_steps, std::uint64_t seed,
                     const RunOptions& opts = {});

/// x <- x - a (grad V(x) + sigma xi), xi standard normal (2 draws per
/// coordinate). Landscape must be x-only. Records every thin-th state.
TrajectoryRecord single_scale_run(const LandscapePtr& V, double a, double sigma, std::vector<double> x0,
                                  std::uint64_t n_steps, std::uint64_t seed, std::size_t thin = 1);

struct OdeTrajectory {
    std::size_t dim_x = 0, dim_y = 0;
    std::vector<double> t;
    std::vector<double> x;
    std::vector<double> y;

    std::size_t size() const noexcept { return t.size(); }
    double x_at(std::size_t i, std::size_t d = 0) const { return x[i * dim_x + d]; }
    double y_at(std::size_t i, std::size_t d = 0) const { return y[i * dim_y + d]; }
};

/// RK4 for x' = -G1(x, y), y' = -epsilon * G2(x, y) with G from
/// averaged_grads. Requires dt <= 0.01 / L.curvature_bound().
OdeTrajectory ode_flow(const LandscapePtr& L, const ChainPtr& C, std::vector<double> x0, std::vector<double> y0,
                       double epsilon, double T, double dt, GradMode mode = GradMode::Full,
                       std::size_t record_every = 1);

}  // namespace memlab
