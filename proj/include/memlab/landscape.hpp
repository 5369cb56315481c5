// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// Stylized two-scale losses f(x, eps*y, z) with analytic partial gradients.
// grad1 is df/dx and grad2 is df/du at u = eps*y (no extra eps factor); the
// SGD update supplies eps through the slow step b = eps*a.

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "memlab/rng.hpp"

namespace memlab {

/// An isolated minimum of an x-only landscape.
struct MinimumInfo {
    std::vector<double> location;
    std::vector<double> hessian_eigenvalues;
    double value = 0.0;
};

/// Axis-aligned box used by fd_check and default sampling.
struct Box {
    std::vector<double> lo_x, hi_x, lo_y, hi_y;
};

class Landscape {
public:
    virtual ~Landscape() = default;

    virtual std::string name() const = 0;
    std::size_t dim_x() const noexcept { return dim_x_; }
    std::size_t dim_y() const noexcept { return dim_y_; }
    double epsilon() const noexcept { return epsilon_; }
    /// Number of noise states accepted; 1 means f ignores z.
    std::size_t noise_arity() const noexcept { return arity_; }

    /// f(x, eps*y, z). Throws DimensionMismatch.
    double eval(std::span<const double> x, std::span<const double> y, std::size_t z) const;
    void grad1(std::span<const double> x, std::span<const double> y, std::size_t z, std::span<double> out) const;
    void grad2(std::span<const double> x, std::span<const double> y, std::size_t z, std::span<double> out) const;

    std::vector<double> grad1(std::span<const double> x, std::span<const double> y, std::size_t z) const;
    std::vector<double> grad2(std::span<const double> x, std::span<const double> y, std::size_t z) const;

    /// Unchecked hot-path versions.
    virtual double eval_unchecked(std::span<const double> x, std::span<const double> y, std::size_t z) const = 0;
    virtual void grad1_unchecked(std::span<const double> x, std::span<const double> y, std::size_t z,
                                 std::span<double> out) const = 0;
    virtual void grad2_unchecked(std::span<const double> x, std::span<const double> y, std::size_t z,
                                 std::span<double> out) const;

    /// Branch metadata: lambda_i(y) for i < branch_count(). Returns false
    /// when branch i does not exist at y.
    virtual std::size_t branch_count() const { return 0; }
    virtual bool branch(std::size_t i, std::span<const double> y, std::span<double> x_out) const;

    /// Slow-scale critical points y_hat_j of phi(lambda_i(y), y), where known.
    virtual std::vector<std::vector<double>> slow_critical_points() const { return {}; }

    /// Minima of x-only landscapes with their Hessian spectra.
    virtual std::vector<MinimumInfo> minima() const { return {}; }

    /// Saddle/barrier points separating the minima of 1-D landscapes.
    virtual std::vector<double> saddles() const { return {}; }

    /// Upper bound of |d^2 f| over the sample box; sets the ODE step limit.
    virtual double curvature_bound() const = 0;

    virtual Box sample_box() const = 0;

    /// Same landscape with a different eps.
    virtual std::shared_ptr<const Landscape> with_epsilon(double epsilon) const = 0;

protected:
    Landscape(std::size_t dim_x, std::size_t dim_y, double epsilon, std::size_t arity);

private:
    void check_dims(std::span<const double> x, std::span<const double> y, std::size_t z) const;

    std::size_t dim_x_;
    std::size_t dim_y_;
    double epsilon_;
    std::size_t arity_;
};

using LandscapePtr = std::shared_ptr<const Landscape>;

/// f = (x - c*z - eps*y)^2 + confinement * (eps*y - target)^2 with z in
/// {-1, +1} (index 0 is -1). The branch lambda(y) = eps*y assumes the paired
/// chain has zero stationary mean.
struct QuadraticTrackingParams {
    double c = 1.0;
    double epsilon = 0.1;
    double confinement = 0.0;
    double target = 0.0;
};
LandscapePtr make_quadratic_tracking(const QuadraticTrackingParams& p = {});

/// V(x) = height * ((x / half_distance)^2 - 1)^2, minima at +-half_distance.
struct SymmetricDoubleWellParams {
    double height = 1.0;
    double half_distance = 1.0;
};
LandscapePtr make_symmetric_double_well(const SymmetricDoubleWellParams& p = {});

/// Two harmonic wells c1/2 (x - m1)^2 and c2/2 (x - m2)^2 of equal depth 0,
/// joined on [-w/2, w/2] by the quintic that matches value join_level and
/// first and second derivatives at both ends (C^2 overall).
struct CurvatureAsymmetricWellParams {
    double c1 = 2.0;
    double c2 = 8.0;
    double join_level = 0.01;
    double join_width = 0.02;
};
LandscapePtr make_curvature_asymmetric_well(const CurvatureAsymmetricWellParams& p = {});

/// s = r = 1, four noise states index = 2*b1 + b2 with z_k = b_k ? +1 : -1:
///   f = x^4/4 - x^2/2 - S*u*x + kappa*S*u*z1 + nu*z2*x,  u = eps*y.
/// For zero-mean z2 the x-minima are the outer roots of x^3 - x - S*u = 0,
/// present while |S*u| < 2/(3*sqrt(3)). With z1 biased towards sign(x) the
/// slow drift pushes y across the fold, so the fast iterate alternates
/// between the two branches.
struct MemorizationDriftParams {
    double strength = 3.0;  // S
    double kappa = 2.0;
    double nu = 1.0;
    double epsilon = 0.02;
};
LandscapePtr make_memorization_drift(const MemorizationDriftParams& p = {});

/// Outer roots of x^3 - x - c = 0 (left, right); NaN where absent.
std::pair<double, double> cubic_branches(double c);

/// x-only f = sum_i x_i^power + offset (power >= 1 integer), noise ignored.
LandscapePtr make_power(int power, double offset = 0.0, std::size_t dim = 1);

/// x-only f = sum_i coeffs_i * x_i^2.
LandscapePtr make_separable_quadratic(std::vector<double> coeffs);

/// Max relative error |analytic - central FD| / max(1, |analytic|) over
/// n_points uniform points of the sample box and random noise indices.
double fd_check(const Landscape& L, std::size_t n_points, double h, Stream& rng);

}  // namespace memlab
