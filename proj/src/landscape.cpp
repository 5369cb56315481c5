// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "memlab/landscape.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "memlab/error.hpp"

namespace memlab {

Landscape::Landscape(std::size_t dim_x, std::size_t dim_y, double epsilon, std::size_t arity)
    : dim_x_(dim_x), dim_y_(dim_y), epsilon_(epsilon), arity_(arity) {
    if (dim_x == 0) throw Error(Errc::ParamOutOfRange, "dim_x must be positive");
    if (arity == 0) throw Error(Errc::ParamOutOfRange, "noise arity must be positive");
    if (dim_y > 0 && !(epsilon > 0.0 && epsilon < 0.5)) {
        throw Error(Errc::ParamOutOfRange, "epsilon must lie in (0, 0.5)");
    }
}

void Landscape::check_dims(std::span<const double> x, std::span<const double> y, std::size_t z) const {
    if (x.size() != dim_x_ || y.size() != dim_y_) {
        throw Error(Errc::DimensionMismatch, name() + ": expected x of size " + std::to_string(dim_x_) +
                                                 " and y of size " + std::to_string(dim_y_));
    }
    if (z >= arity_) throw Error(Errc::IndexOutOfRange, name() + ": noise index out of range");
}

double Landscape::eval(std::span<const double> x, std::span<const double> y, std::size_t z) const {
    check_dims(x, y, z);
    return eval_unchecked(x, y, z);
}

void Landscape::grad1(std::span<const double> x, std::span<const double> y, std::size_t z,
                      std::span<double> out) const {
    check_dims(x, y, z);
    if (out.size() != dim_x_) throw Error(Errc::DimensionMismatch, "grad1 output size");
    grad1_unchecked(x, y, z, out);
}

void Landscape::grad2(std::span<const double> x, std::span<const double> y, std::size_t z,
                      std::span<double> out) const {
    check_dims(x, y, z);
    if (out.size() != dim_y_) throw Error(Errc::DimensionMismatch, "grad2 output size");
    grad2_unchecked(x, y, z, out);
}

std::vector<double> Landscape::grad1(std::span<const double> x, std::span<const double> y, std::size_t z) const {
    std::vector<double> out(dim_x_);
    grad1(x, y, z, out);
    return out;
}

std::vector<double> Landscape::grad2(std::span<const double> x, std::span<const double> y, std::size_t z) const {
    std::vector<double> out(dim_y_);
    grad2(x, y, z, out);
    return out;
}

void Landscape::grad2_unchecked(std::span<const double>, std::span<const double>, std::size_t,
                                std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
}

bool Landscape::branch(std::size_t, std::span<const double>, std::span<double>) const { return false; }

namespace {

double sign_of(std::size_t z) { return z == 0 ? -1.0 : 1.0; }

class QuadraticTracking final : public Landscape {
public:
    explicit QuadraticTracking(const QuadraticTrackingParams& p) : Landscape(1, 1, p.epsilon, 2), p_(p) {
        if (!(p.confinement >= 0.0)) throw Error(Errc::ParamOutOfRange, "confinement must be >= 0");
    }

    std::string name() const override { return "QuadraticTracking"; }

    double eval_unchecked(std::span<const double> x, std::span<const double> y, std::size_t z) const override {
        const double u = epsilon() * y[0];
        const double r = x[0] - p_.c * sign_of(z) - u;
        const double s = u - p_.target;
        return r * r + p_.confinement * s * s;
    }
    void grad1_unchecked(std::span<const double> x, std::span<const double> y, std::size_t z,
                         std::span<double> out) const override {
        out[0] = 2.0 * (x[0] - p_.c * sign_of(z) - epsilon() * y[0]);
    }
    void grad2_unchecked(std::span<const double> x, std::span<const double> y, std::size_t z,
                         std::span<double> out) const override {
        const double u = epsilon() * y[0];
        out[0] = -2.0 * (x[0] - p_.c * sign_of(z) - u) + 2.0 * p_.confinement * (u - p_.target);
    }

    std::size_t branch_count() const override { return 1; }
    bool branch(std::size_t i, std::span<const double> y, std::span<double> x_out) const override {
        if (i != 0) return false;
        x_out[0] = epsilon() * y[0];
        return true;
    }
    std::vector<std::vector<double>> slow_critical_points() const override {
        if (p_.confinement > 0.0) return {{p_.target / epsilon()}};
        return {};
    }
    double curvature_bound() const override { return 4.0 + 2.0 * p_.confinement; }
    Box sample_box() const override { return {{-3.0}, {3.0}, {-10.0}, {10.0}}; }
    LandscapePtr with_epsilon(double eps) const override {
        auto p = p_;
        p.epsilon = eps;
        return std::make_shared<QuadraticTracking>(p);
    }

private:
    QuadraticTrackingParams p_;
};

class SymmetricDoubleWell final : public Landscape {
public:
    explicit SymmetricDoubleWell(const SymmetricDoubleWellParams& p) : Landscape(1, 0, 0.0, 1), p_(p) {
        if (!(p.height > 0.0) || !(p.half_distance > 0.0)) {
            throw Error(Errc::ParamOutOfRange, "double well height and half_distance must be positive");
        }
    }

    std::string name() const override { return "SymmetricDoubleWell"; }

    double eval_unchecked(std::span<const double> x, std::span<const double>, std::size_t) const override {
        const double s = x[0] / p_.half_distance;
        const double t = s * s - 1.0;
        return p_.height * t * t;
    }
    void grad1_unchecked(std::span<const double> x, std::span<const double>, std::size_t,
                         std::span<double> out) const override {
        const double w = p_.half_distance;
        const double s = x[0] / w;
        out[0] = 4.0 * p_.height * (s * s - 1.0) * s / w;
    }

    std::size_t branch_count() const override { return 2; }
    bool branch(std::size_t i, std::span<const double>, std::span<double> x_out) const override {
        if (i > 1) return false;
        x_out[0] = i == 0 ? -p_.half_distance : p_.half_distance;
        return true;
    }
    std::vector<MinimumInfo> minima() const override {
        const double k = 8.0 * p_.height / (p_.half_distance * p_.half_distance);
        return {{{-p_.half_distance}, {k}, 0.0}, {{p_.half_distance}, {k}, 0.0}};
    }
    std::vector<double> saddles() const override { return {0.0}; }
    double curvature_bound() const override {
        return 44.0 * p_.height / (p_.half_distance * p_.half_distance);
    }
    Box sample_box() const override { return {{-2.0 * p_.half_distance}, {2.0 * p_.half_distance}, {}, {}}; }
    LandscapePtr with_epsilon(double) const override { return std::make_shared<SymmetricDoubleWell>(p_); }

private:
    SymmetricDoubleWellParams p_;
};

class CurvatureAsymmetricWell final : public Landscape {
public:
    explicit CurvatureAsymmetricWell(const CurvatureAsymmetricWellParams& p) : Landscape(1, 0, 0.0, 1), p_(p) {
        if (!(p.c1 > 0.0 && p.c2 > 0.0 && p.join_level > 0.0 && p.join_width > 0.0)) {
            throw Error(Errc::ParamOutOfRange, "well parameters must be positive");
        }
        left_ = -0.5 * p.join_width;
        right_ = 0.5 * p.join_width;
        m1_ = left_ - std::sqrt(2.0 * p.join_level / p.c1);
        m2_ = right_ + std::sqrt(2.0 * p.join_level / p.c2);

        // Quintic in t = x - left_ matching (V, V', V'') at both ends.
        const double len = right_ - left_;
        Eigen::Matrix<double, 6, 6> A = Eigen::Matrix<double, 6, 6>::Zero();
        Eigen::Matrix<double, 6, 1> b;
        auto fill = [&](int row0, double t) {
            for (int k = 0; k < 6; ++k) {
                A(row0, k) = std::pow(t, k);
                A(row0 + 1, k) = k >= 1 ? k * std::pow(t, k - 1) : 0.0;
                A(row0 + 2, k) = k >= 2 ? k * (k - 1) * std::pow(t, k - 2) : 0.0;
            }
        };
        fill(0, 0.0);
        fill(3, len);
        const double h = p.join_level;
        b << h, std::sqrt(2.0 * p.c1 * h), p.c1, h, -std::sqrt(2.0 * p.c2 * h), p.c2;
        const Eigen::Matrix<double, 6, 1> c = A.fullPivLu().solve(b);
        for (int k = 0; k < 6; ++k) coef_[k] = c(k);

        // Barrier top and curvature bound by dense scan of the connector.
        double best = -1.0;
        curvature_ = std::max(p.c1, p.c2);
        constexpr int kScan = 20000;
        for (int i = 0; i <= kScan; ++i) {
            const double x = left_ + len * i / kScan;
            const double v = value(x);
            if (v > best) {
                best = v;
                saddle_ = x;
            }
            curvature_ = std::max(curvature_, std::abs(second(x)));
        }
    }

    std::string name() const override { return "CurvatureAsymmetricWell"; }

    double eval_unchecked(std::span<const double> x, std::span<const double>, std::size_t) const override {
        return value(x[0]);
    }
    void grad1_unchecked(std::span<const double> x, std::span<const double>, std::size_t,
                         std::span<double> out) const override {
        out[0] = first(x[0]);
    }

    std::size_t branch_count() const override { return 2; }
    bool branch(std::size_t i, std::span<const double>, std::span<double> x_out) const override {
        if (i > 1) return false;
        x_out[0] = i == 0 ? m1_ : m2_;
        return true;
    }
    std::vector<MinimumInfo> minima() const override { return {{{m1_}, {p_.c1}, 0.0}, {{m2_}, {p_.c2}, 0.0}}; }
    std::vector<double> saddles() const override { return {saddle_}; }
    double curvature_bound() const override { return curvature_; }
    Box sample_box() const override { return {{m1_ - 0.2}, {m2_ + 0.2}, {}, {}}; }
    LandscapePtr with_epsilon(double) const override { return std::make_shared<CurvatureAsymmetricWell>(p_); }

private:
    double value(double x) const {
        if (x <= left_) return 0.5 * p_.c1 * (x - m1_) * (x - m1_);
        if (x >= right_) return 0.5 * p_.c2 * (x - m2_) * (x - m2_);
        const double t = x - left_;
        return coef_[0] + t * (coef_[1] + t * (coef_[2] + t * (coef_[3] + t * (coef_[4] + t * coef_[5]))));
    }
    double first(double x) const {
        if (x <= left_) return p_.c1 * (x - m1_);
        if (x >= right_) return p_.c2 * (x - m2_);
        const double t = x - left_;
        return coef_[1] + t * (2.0 * coef_[2] + t * (3.0 * coef_[3] + t * (4.0 * coef_[4] + t * 5.0 * coef_[5])));
    }
    double second(double x) const {
        if (x <= left_) return p_.c1;
        if (x >= right_) return p_.c2;
        const double t = x - left_;
        return 2.0 * coef_[2] + t * (6.0 * coef_[3] + t * (12.0 * coef_[4] + t * 20.0 * coef_[5]));
    }

    CurvatureAsymmetricWellParams p_;
    double left_ = 0.0, right_ = 0.0, m1_ = 0.0, m2_ = 0.0, saddle_ = 0.0, curvature_ = 0.0;
    double coef_[6] = {};
};

class MemorizationDrift final : public Landscape {
public:
    explicit MemorizationDrift(const MemorizationDriftParams& p) : Landscape(1, 1, p.epsilon, 4), p_(p) {}

    std::string name() const override { return "MemorizationDrift"; }

    double eval_unchecked(std::span<const double> x, std::span<const double> y, std::size_t z) const override {
        const double u = epsilon() * y[0];
        const double z1 = sign_of(z >> 1), z2 = sign_of(z & 1);
        const double v = x[0];
        const double s = p_.strength;
        return 0.25 * v * v * v * v - 0.5 * v * v - s * u * v + p_.kappa * s * u * z1 + p_.nu * z2 * v;
    }
    void grad1_unchecked(std::span<const double> x, std::span<const double> y, std::size_t z,
                         std::span<double> out) const override {
        const double u = epsilon() * y[0];
        const double v = x[0];
        out[0] = v * v * v - v - p_.strength * u + p_.nu * sign_of(z & 1);
    }
    void grad2_unchecked(std::span<const double> x, std::span<const double>, std::size_t z,
                         std::span<double> out) const override {
        out[0] = p_.strength * (p_.kappa * sign_of(z >> 1) - x[0]);
    }

    std::size_t branch_count() const override { return 2; }
    bool branch(std::size_t i, std::span<const double> y, std::span<double> x_out) const override {
        if (i > 1) return false;
        const auto [lo, hi] = cubic_branches(p_.strength * epsilon() * y[0]);
        const double v = i == 0 ? lo : hi;
        if (std::isnan(v)) return false;
        x_out[0] = v;
        return true;
    }
    double curvature_bound() const override { return 12.0 + p_.strength * (1.0 + p_.kappa); }
    Box sample_box() const override {
        const double ymax = 0.5 / epsilon();
        return {{-2.0}, {2.0}, {-ymax}, {ymax}};
    }
    LandscapePtr with_epsilon(double eps) const override {
        auto p = p_;
        p.epsilon = eps;
        return std::make_shared<MemorizationDrift>(p);
    }

private:
    MemorizationDriftParams p_;
};

class Power final : public Landscape {
public:
    Power(int power, double offset, std::size_t dim) : Landscape(dim, 0, 0.0, 1), power_(power), offset_(offset) {
        if (power < 1) throw Error(Errc::ParamOutOfRange, "power must be >= 1");
    }
    std::string name() const override { return "Power"; }
    double eval_unchecked(std::span<const double> x, std::span<const double>, std::size_t) const override {
        double s = offset_;
        for (double v : x) s += std::pow(v, power_);
        return s;
    }
    void grad1_unchecked(std::span<const double> x, std::span<const double>, std::size_t,
                         std::span<double> out) const override {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = power_ * std::pow(x[i], power_ - 1);
    }
    double curvature_bound() const override {
        return power_ < 2 ? 1.0 : power_ * (power_ - 1) * std::pow(2.0, power_ - 2);
    }
    Box sample_box() const override {
        return {std::vector<double>(dim_x(), -2.0), std::vector<double>(dim_x(), 2.0), {}, {}};
    }
    LandscapePtr with_epsilon(double) const override { return std::make_shared<Power>(power_, offset_, dim_x()); }

private:
    int power_;
    double offset_;
};

class SeparableQuadratic final : public Landscape {
public:
    explicit SeparableQuadratic(std::vector<double> coeffs)
        : Landscape(coeffs.size(), 0, 0.0, 1), coeffs_(std::move(coeffs)) {}
    std::string name() const override { return "SeparableQuadratic"; }
    double eval_unchecked(std::span<const double> x, std::span<const double>, std::size_t) const override {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += coeffs_[i] * x[i] * x[i];
        return s;
    }
    void grad1_unchecked(std::span<const double> x, std::span<const double>, std::size_t,
                         std::span<double> out) const override {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = 2.0 * coeffs_[i] * x[i];
    }
    double curvature_bound() const override {
        double m = 0.0;
        for (double c : coeffs_) m = std::max(m, 2.0 * std::abs(c));
        return std::max(m, 1e-12);
    }
    Box sample_box() const override {
        return {std::vector<double>(dim_x(), -2.0), std::vector<double>(dim_x(), 2.0), {}, {}};
    }
    LandscapePtr with_epsilon(double) const override { return std::make_shared<SeparableQuadratic>(coeffs_); }

private:
    std::vector<double> coeffs_;
};

}  // namespace

std::pair<double, double> cubic_branches(double c) {
    constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
    const double fold = 2.0 / (3.0 * std::sqrt(3.0));
    if (std::abs(c) >= fold) {
        // One real root.
        const double disc = std::sqrt(c * c / 4.0 - 1.0 / 27.0);
        const double r = std::cbrt(c / 2.0 + disc) + std::cbrt(c / 2.0 - disc);
        return c > 0.0 ? std::pair{kNaN, r} : std::pair{r, kNaN};
    }
    const double theta = std::acos(c * 3.0 * std::sqrt(3.0) / 2.0) / 3.0;
    const double radius = 2.0 / std::sqrt(3.0);
    return {radius * std::cos(theta + 2.0 * std::numbers::pi / 3.0), radius * std::cos(theta)};
}

LandscapePtr make_quadratic_tracking(const QuadraticTrackingParams& p) {
    return std::make_shared<QuadraticTracking>(p);
}
LandscapePtr make_symmetric_double_well(const SymmetricDoubleWellParams& p) {
    return std::make_shared<SymmetricDoubleWell>(p);
}
LandscapePtr make_curvature_asymmetric_well(const CurvatureAsymmetricWellParams& p) {
    return std::make_shared<CurvatureAsymmetricWell>(p);
}
LandscapePtr make_memorization_drift(const MemorizationDriftParams& p) {
    return std::make_shared<MemorizationDrift>(p);
}
LandscapePtr make_power(int power, double offset, std::size_t dim) {
    return std::make_shared<Power>(power, offset, dim);
}
LandscapePtr make_separable_quadratic(std::vector<double> coeffs) {
    return std::make_shared<SeparableQuadratic>(std::move(coeffs));
}

double fd_check(const Landscape& L, std::size_t n_points, double h, Stream& rng) {
    if (!(h > 1e-8 && h < 1e-2)) throw Error(Errc::ParamOutOfRange, "fd step must lie in (1e-8, 1e-2)");
    const Box box = L.sample_box();
    const std::size_t s = L.dim_x(), r = L.dim_y();
    std::vector<double> x(s), y(r), g1(s), g2(r), probe;
    double worst = 0.0;
    auto rel = [](double analytic, double numeric) {
        return std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
    };
    for (std::size_t k = 0; k < n_points; ++k) {
        for (std::size_t i = 0; i < s; ++i) x[i] = box.lo_x[i] + (box.hi_x[i] - box.lo_x[i]) * rng.uniform();
        for (std::size_t j = 0; j < r; ++j) y[j] = box.lo_y[j] + (box.hi_y[j] - box.lo_y[j]) * rng.uniform();
        const auto z = static_cast<std::size_t>(rng.uniform() * static_cast<double>(L.noise_arity()));
        L.grad1(x, y, z, g1);
        L.grad2(x, y, z, g2);
        for (std::size_t i = 0; i < s; ++i) {
            probe = x;
            probe[i] = x[i] + h;
            const double fp = L.eval(probe, y, z);
            probe[i] = x[i] - h;
            const double fm = L.eval(probe, y, z);
            worst = std::max(worst, rel(g1[i], (fp - fm) / (2.0 * h)));
        }
        // grad2 is with respect to u = eps*y; perturb y by h/eps.
        for (std::size_t j = 0; j < r; ++j) {
            probe = y;
            const double hy = h / L.epsilon();
            probe[j] = y[j] + hy;
            const double fp = L.eval(x, probe, z);
            probe[j] = y[j] - hy;
            const double fm = L.eval(x, probe, z);
            worst = std::max(worst, rel(g2[j], (fp - fm) / (2.0 * h)));
        }
    }
    return worst;
}

}  // namespace memlab
