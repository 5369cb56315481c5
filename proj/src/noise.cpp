// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "memlab/noise.hpp"

#include <algorithm>
#include <cmath>

#include "memlab/error.hpp"

namespace memlab {

namespace {

constexpr double kResidualTol = 1e-10;
constexpr std::size_t kDenseLimit = 200;
constexpr double kFdStep = 1e-5;

}  // namespace

void ControlledChain::kernel_derivative(std::span<const double>, std::span<const double>, std::size_t,
                                        Eigen::MatrixXd&) const {
    throw Error(Errc::NotDifferentiable, name() + ": no analytic kernel derivative");
}

Eigen::MatrixXd ControlledChain::kernel(std::span<const double> x, std::span<const double> y) const {
    const std::size_t k = n_states();
    Eigen::MatrixXd P(k, k);
    std::vector<double> buf(k);
    for (std::size_t i = 0; i < k; ++i) {
        row(x, y, i, buf);
        for (std::size_t j = 0; j < k; ++j) P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = buf[j];
    }
    return P;
}

namespace {

class FlipChain final : public ControlledChain {
public:
    FlipChain(double alpha, double beta) : alpha_(alpha), beta_(beta) {
        if (!(alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0)) {
            throw Error(Errc::ParamOutOfRange, "flip probabilities must lie in [0, 1]");
        }
    }
    std::string name() const override { return "flip"; }
    std::size_t n_states() const override { return 2; }
    void row(std::span<const double>, std::span<const double>, std::size_t from,
             std::span<double> out) const override {
        if (from == 0) {
            out[0] = 1.0 - alpha_;
            out[1] = alpha_;
        } else {
            out[0] = beta_;
            out[1] = 1.0 - beta_;
        }
    }
    bool parameter_dependent() const override { return false; }

private:
    double alpha_, beta_;
};

class IidChain final : public ControlledChain {
public:
    explicit IidChain(std::vector<double> pi) : pi_(DiscreteMeasure::from_weights(pi)) {}
    std::string name() const override { return "iid"; }
    std::size_t n_states() const override { return pi_.support_size(); }
    void row(std::span<const double>, std::span<const double>, std::size_t, std::span<double> out) const override {
        std::copy(pi_.weights().begin(), pi_.weights().end(), out.begin());
    }
    bool parameter_dependent() const override { return false; }

private:
    DiscreteMeasure pi_;
};

class LogisticChain final : public ControlledChain {
public:
    explicit LogisticChain(const LogisticChainParams& p) : p_(p) {
        if (!(p.stay >= 0.0 && p.stay < 1.0)) throw Error(Errc::ParamOutOfRange, "stay must lie in [0, 1)");
    }
    std::string name() const override { return "logistic"; }
    std::size_t n_states() const override { return 2; }
    void row(std::span<const double> x, std::span<const double> y, std::size_t from,
             std::span<double> out) const override {
        const double q = 0.5 * (1.0 + std::tanh(argument(x, y)));
        const double move = 1.0 - p_.stay;
        out[0] = move * (1.0 - q);
        out[1] = move * q;
        out[from] += p_.stay;
    }
    bool parameter_dependent() const override { return p_.beta_x != 0.0 || p_.beta_y != 0.0; }
    bool has_kernel_derivative() const override { return true; }
    void kernel_derivative(std::span<const double> x, std::span<const double> y, std::size_t param,
                           Eigen::MatrixXd& out) const override {
        out = Eigen::MatrixXd::Zero(2, 2);
        double slope = 0.0;
        if (param == 0 && !x.empty()) slope = p_.beta_x;
        if (param == x.size() && !y.empty()) slope = p_.beta_y;
        if (slope == 0.0) return;
        const double t = std::tanh(argument(x, y));
        const double dq = 0.5 * (1.0 - t * t) * slope * (1.0 - p_.stay);
        out << -dq, dq, -dq, dq;
    }

private:
    double argument(std::span<const double> x, std::span<const double> y) const {
        const double x0 = x.empty() ? 0.0 : x[0];
        const double y0 = y.empty() ? 0.0 : y[0];
        return p_.beta_x * x0 + p_.beta_y * y0 + p_.bias;
    }
    LogisticChainParams p_;
};

class ProductChain final : public ControlledChain {
public:
    ProductChain(ChainPtr a, ChainPtr b) : a_(std::move(a)), b_(std::move(b)) {}
    std::string name() const override { return "product(" + a_->name() + "," + b_->name() + ")"; }
    std::size_t n_states() const override { return a_->n_states() * b_->n_states(); }
    void row(std::span<const double> x, std::span<const double> y, std::size_t from,
             std::span<double> out) const override {
        const std::size_t nb = b_->n_states();
        double ra[64], rb[64];
        std::vector<double> big_a, big_b;
        std::span<double> sa(ra, a_->n_states()), sb(rb, nb);
        if (a_->n_states() > 64 || nb > 64) {
            big_a.resize(a_->n_states());
            big_b.resize(nb);
            sa = big_a;
            sb = big_b;
        }
        a_->row(x, y, from / nb, sa);
        b_->row(x, y, from % nb, sb);
        for (std::size_t i = 0; i < sa.size(); ++i)
            for (std::size_t j = 0; j < nb; ++j) out[i * nb + j] = sa[i] * sb[j];
    }
    bool parameter_dependent() const override { return a_->parameter_dependent() || b_->parameter_dependent(); }
    bool differentiable() const override { return a_->differentiable() && b_->differentiable(); }
    bool has_kernel_derivative() const override {
        return (!a_->parameter_dependent() || a_->has_kernel_derivative()) &&
               (!b_->parameter_dependent() || b_->has_kernel_derivative());
    }
    void kernel_derivative(std::span<const double> x, std::span<const double> y, std::size_t param,
                           Eigen::MatrixXd& out) const override {
        const Eigen::MatrixXd A = a_->kernel(x, y), B = b_->kernel(x, y);
        Eigen::MatrixXd dA = Eigen::MatrixXd::Zero(A.rows(), A.cols());
        Eigen::MatrixXd dB = Eigen::MatrixXd::Zero(B.rows(), B.cols());
        if (a_->parameter_dependent()) a_->kernel_derivative(x, y, param, dA);
        if (b_->parameter_dependent()) b_->kernel_derivative(x, y, param, dB);
        out = kron(dA, B) + kron(A, dB);
    }

private:
    static Eigen::MatrixXd kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
        Eigen::MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            for (Eigen::Index j = 0; j < A.cols(); ++j)
                K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
        return K;
    }
    ChainPtr a_, b_;
};

class FunctionChain final : public ControlledChain {
public:
    FunctionChain(std::string name, std::size_t n, KernelFn kernel, bool dependent, KernelDerivFn deriv,
                  bool differentiable)
        : name_(std::move(name)),
          n_(n),
          kernel_(std::move(kernel)),
          dependent_(dependent),
          deriv_(std::move(deriv)),
          differentiable_(differentiable) {}
    std::string name() const override { return name_; }
    std::size_t n_states() const override { return n_; }
    void row(std::span<const double> x, std::span<const double> y, std::size_t from,
             std::span<double> out) const override {
        const Eigen::MatrixXd P = kernel_(x, y);
        for (std::size_t j = 0; j < n_; ++j) out[j] = P(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(j));
    }
    bool parameter_dependent() const override { return dependent_; }
    bool differentiable() const override { return differentiable_; }
    bool has_kernel_derivative() const override { return static_cast<bool>(deriv_); }
    void kernel_derivative(std::span<const double> x, std::span<const double> y, std::size_t param,
                           Eigen::MatrixXd& out) const override {
        if (!deriv_) ControlledChain::kernel_derivative(x, y, param, out);
        out = deriv_(x, y, param);
    }

private:
    std::string name_;
    std::size_t n_;
    KernelFn kernel_;
    bool dependent_;
    KernelDerivFn deriv_;
    bool differentiable_;
};

}  // namespace

ChainPtr make_flip_chain(double alpha, double beta) { return std::make_shared<FlipChain>(alpha, beta); }
ChainPtr make_iid_chain(std::vector<double> pi) { return std::make_shared<IidChain>(std::move(pi)); }
ChainPtr make_logistic_chain(const LogisticChainParams& p) { return std::make_shared<LogisticChain>(p); }
ChainPtr make_product_chain(ChainPtr a, ChainPtr b) {
    return std::make_shared<ProductChain>(std::move(a), std::move(b));
}
ChainPtr make_memorization_chain(double stay, double beta) {
    LogisticChainParams p;
    p.stay = stay;
    p.beta_x = beta;
    return make_product_chain(make_logistic_chain(p), make_iid_chain({0.5, 0.5}));
}
ChainPtr make_function_chain(std::string name, std::size_t n_states, KernelFn kernel, bool parameter_dependent,
                             KernelDerivFn derivative, bool differentiable) {
    return std::make_shared<FunctionChain>(std::move(name), n_states, std::move(kernel), parameter_dependent,
                                           std::move(derivative), differentiable);
}

std::size_t noise_step(const ControlledChain& C, std::span<const double> x, std::span<const double> y,
                       std::size_t state, Stream& rng) {
    thread_local std::vector<double> buf;
    buf.resize(C.n_states());
    C.row(x, y, state, buf);
    return rng.categorical(buf);
}

namespace {

// (I - P)^T with its last row replaced by ones; pi and d pi solve systems
// with this matrix.
Eigen::MatrixXd bordered_system(const Eigen::MatrixXd& P) {
    const Eigen::Index k = P.rows();
    Eigen::MatrixXd M = (Eigen::MatrixXd::Identity(k, k) - P).transpose();
    M.row(k - 1).setOnes();
    return M;
}

DiscreteMeasure finish(const Eigen::VectorXd& v, const std::string& chain) {
    std::vector<double> w(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v(i)) || v(i) < -1e-9) throw Error(Errc::NotIrreducible, chain + ": invalid stationary law");
        w[static_cast<std::size_t>(i)] = std::max(0.0, v(i));
    }
    return DiscreteMeasure::from_weights(w);
}

}  // namespace

double stationary_residual(const ControlledChain& C, std::span<const double> x, std::span<const double> y,
                           const DiscreteMeasure& pi) {
    const Eigen::MatrixXd P = C.kernel(x, y);
    Eigen::VectorXd p(static_cast<Eigen::Index>(pi.support_size()));
    for (std::size_t i = 0; i < pi.support_size(); ++i) p(static_cast<Eigen::Index>(i)) = pi[i];
    return (P.transpose() * p - p).cwiseAbs().maxCoeff();
}

DiscreteMeasure stationary_distribution(const ControlledChain& C, std::span<const double> x,
                                        std::span<const double> y) {
    const std::size_t k = C.n_states();
    if (k == 1) return DiscreteMeasure::dirac(1, 0);
    const Eigen::MatrixXd P = C.kernel(x, y);
    const auto n = static_cast<Eigen::Index>(k);
    Eigen::VectorXd pi;
    if (k <= kDenseLimit) {
        Eigen::FullPivLU<Eigen::MatrixXd> rank_lu(Eigen::MatrixXd::Identity(n, n) - P);
        rank_lu.setThreshold(1e-12);
        if (rank_lu.rank() != n - 1) throw Error(Errc::NotIrreducible, C.name() + ": stationary law is not unique");
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
        rhs(n - 1) = 1.0;
        pi = bordered_system(P).fullPivLu().solve(rhs);
    } else {
        pi = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(k));
        bool converged = false;
        for (int it = 0; it < 1000000 && !converged; ++it) {
            Eigen::VectorXd next = P.transpose() * pi;
            next /= next.sum();
            converged = (next - pi).cwiseAbs().maxCoeff() < 1e-14;
            pi = std::move(next);
        }
        if (!converged) throw Error(Errc::NotIrreducible, C.name() + ": power iteration did not converge");
    }
    DiscreteMeasure out = finish(pi, C.name());
    if (stationary_residual(C, x, y, out) >= kResidualTol) {
        throw Error(Errc::NotIrreducible, C.name() + ": stationary residual above tolerance");
    }
    return out;
}

double averaged_loss(const Landscape& L, const ControlledChain& C, std::span<const double> x,
                     std::span<const double> y) {
    if (L.noise_arity() != 1 && L.noise_arity() != C.n_states()) {
        throw Error(Errc::DimensionMismatch, L.name() + " noise arity differs from chain " + C.name());
    }
    const DiscreteMeasure pi = stationary_distribution(C, x, y);
    double s = 0.0;
    for (std::size_t z = 0; z < C.n_states(); ++z) {
        if (pi[z] == 0.0) continue;
        s += pi[z] * L.eval(x, y, L.noise_arity() == 1 ? 0 : z);
    }
    return s;
}

AveragedGrads averaged_grads(const Landscape& L, const ControlledChain& C, std::span<const double> x,
                             std::span<const double> y, GradMode mode) {
    if (L.noise_arity() != 1 && L.noise_arity() != C.n_states()) {
        throw Error(Errc::DimensionMismatch, L.name() + " noise arity differs from chain " + C.name());
    }
    const std::size_t s = L.dim_x(), r = L.dim_y(), k = C.n_states();
    auto zi = [&](std::size_t z) { return L.noise_arity() == 1 ? std::size_t{0} : z; };

    if (mode == GradMode::Full && C.parameter_dependent()) {
        if (!C.differentiable()) throw Error(Errc::NotDifferentiable, C.name() + " is not differentiable");
        if (!C.has_kernel_derivative()) {
            AveragedGrads g{std::vector<double>(s), std::vector<double>(r)};
            std::vector<double> probe;
            for (std::size_t i = 0; i < s; ++i) {
                probe.assign(x.begin(), x.end());
                probe[i] = x[i] + kFdStep;
                const double fp = averaged_loss(L, C, probe, y);
                probe[i] = x[i] - kFdStep;
                const double fm = averaged_loss(L, C, probe, y);
                g.g1[i] = (fp - fm) / (2.0 * kFdStep);
            }
            for (std::size_t j = 0; j < r; ++j) {
                const double hy = kFdStep / L.epsilon();
                probe.assign(y.begin(), y.end());
                probe[j] = y[j] + hy;
                const double fp = averaged_loss(L, C, x, probe);
                probe[j] = y[j] - hy;
                const double fm = averaged_loss(L, C, x, probe);
                g.g2[j] = (fp - fm) / (2.0 * kFdStep);
            }
            return g;
        }
    }

    const DiscreteMeasure pi = stationary_distribution(C, x, y);
    AveragedGrads g{std::vector<double>(s, 0.0), std::vector<double>(r, 0.0)};
    std::vector<double> b1(s), b2(r), fz(k);
    for (std::size_t z = 0; z < k; ++z) {
        fz[z] = L.eval(x, y, zi(z));
        if (pi[z] == 0.0) continue;
        L.grad1(x, y, zi(z), b1);
        L.grad2(x, y, zi(z), b2);
        for (std::size_t i = 0; i < s; ++i) g.g1[i] += pi[z] * b1[i];
        for (std::size_t j = 0; j < r; ++j) g.g2[j] += pi[z] * b2[j];
    }
    if (mode == GradMode::Frozen || !C.parameter_dependent()) return g;

    const Eigen::MatrixXd P = C.kernel(x, y);
    const auto n = static_cast<Eigen::Index>(k);
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(bordered_system(P));
    Eigen::VectorXd p(n);
    for (std::size_t z = 0; z < k; ++z) p(static_cast<Eigen::Index>(z)) = pi[z];
    Eigen::MatrixXd dP;
    for (std::size_t param = 0; param < s + r; ++param) {
        C.kernel_derivative(x, y, param, dP);
        Eigen::VectorXd rhs = dP.transpose() * p;
        rhs(n - 1) = 0.0;
        const Eigen::VectorXd dpi = lu.solve(rhs);
        double corr = 0.0;
        for (std::size_t z = 0; z < k; ++z) corr += fz[z] * dpi(static_cast<Eigen::Index>(z));
        if (param < s) {
            g.g1[param] += corr;
        } else {
            g.g2[param - s] += corr / L.epsilon();
        }
    }
    return g;
}

}  // namespace memlab
