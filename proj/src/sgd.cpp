// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "memlab/sgd.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "memlab/csv.hpp"

namespace memlab {

StepSchedule StepSchedule::constant(double a, double epsilon) {
    StepSchedule s;
    s.kind = Kind::Constant;
    s.a = a;
    s.epsilon = epsilon;
    return s;
}

StepSchedule StepSchedule::decreasing(double c_a, double c_b, double q, double p) {
    StepSchedule s;
    s.kind = Kind::Decreasing;
    s.c_a = c_a;
    s.c_b = c_b;
    s.q = q;
    s.p = p;
    return s;
}

double StepSchedule::fast(std::uint64_t n) const {
    if (kind == Kind::Constant) return a;
    return c_a / std::pow(static_cast<double>(n) + 1.0, q);
}

double StepSchedule::slow(std::uint64_t n) const {
    if (kind == Kind::Constant) return epsilon * a;
    return c_b / std::pow(static_cast<double>(n) + 1.0, p);
}

std::string StepSchedule::describe() const {
    if (kind == Kind::Constant) return "constant(a=" + format_double(a) + ",epsilon=" + format_double(epsilon) + ")";
    return "decreasing(c_a=" + format_double(c_a) + ",c_b=" + format_double(c_b) + ",q=" + format_double(q) +
           ",p=" + format_double(p) + ")";
}

ScheduleReport validate_schedule(const StepSchedule& s) {
    ScheduleReport r;
    if (s.kind == StepSchedule::Kind::Constant) {
        r.robbins_monro = false;
        r.reasons.push_back("constant steps: sum of squared steps diverges");
        if (!(s.a > 0.0)) r.reasons.push_back("a must be positive");
        r.timescale_separated = s.epsilon > 0.0 && s.epsilon < 1.0;
        if (!r.timescale_separated) r.reasons.push_back("epsilon must lie in (0, 1)");
        return r;
    }
    bool ok = true;
    auto check = [&](double c, double e, const char* tag) {
        if (!(c > 0.0)) {
            ok = false;
            r.reasons.push_back(std::string(tag) + ": coefficient must be positive");
        }
        if (!(e <= 1.0)) {
            ok = false;
            r.reasons.push_back(std::string(tag) + ": exponent " + format_double(e) + " > 1, steps are summable");
        }
        if (!(e > 0.5)) {
            ok = false;
            r.reasons.push_back(std::string(tag) + ": exponent " + format_double(e) +
                                " <= 0.5, squared steps are not summable");
        }
    };
    check(s.c_a, s.q, "a_n");
    check(s.c_b, s.p, "b_n");
    r.robbins_monro = ok;
    r.timescale_separated = s.p > s.q;
    if (!r.timescale_separated) r.reasons.push_back("b_n is not o(a_n): need p > q");
    return r;
}

std::string_view mode_name(SgdMode mode) {
    switch (mode) {
    case SgdMode::Instantaneous: return "instantaneous";
    case SgdMode::AveragedFull: return "averaged_full";
    case SgdMode::AveragedFrozen: return "averaged_frozen";
    }
    return "?";
}

void TrajectoryRecord::push(const TwoScaleState& st, double loss_value) {
    n.push_back(st.n);
    x.insert(x.end(), st.x.begin(), st.x.end());
    y.insert(y.end(), st.y.begin(), st.y.end());
    loss.push_back(loss_value);
    noise_state.push_back(st.noise_state);
}

std::string TrajectoryRecord::to_csv() const {
    std::vector<std::string> header{"n"};
    for (std::size_t i = 0; i < dim_x; ++i) header.push_back("x" + std::to_string(i));
    for (std::size_t j = 0; j < dim_y; ++j) header.push_back("y" + std::to_string(j));
    header.push_back("loss");
    header.push_back("noise_state");
    CsvTable t(header);
    std::vector<std::string> row;
    for (std::size_t k = 0; k < size(); ++k) {
        row.clear();
        row.push_back(std::to_string(n[k]));
        for (std::size_t i = 0; i < dim_x; ++i) row.push_back(format_double(x_at(k, i)));
        for (std::size_t j = 0; j < dim_y; ++j) row.push_back(format_double(y_at(k, j)));
        row.push_back(format_double(loss[k]));
        row.push_back(std::to_string(noise_state[k]));
        t.add_row(row);
    }
    return t.str();
}

namespace {

bool diverged(const TwoScaleState& st) {
    double nx = 0.0, ny = 0.0;
    for (double v : st.x) nx += v * v;
    for (double v : st.y) ny += v * v;
    const double total = std::sqrt(nx) + std::sqrt(ny);
    return !std::isfinite(total) || total > kDivergenceBound;
}

std::size_t landscape_z(const Landscape& L, std::size_t z) { return L.noise_arity() == 1 ? 0 : z; }

// phi(x, y), reusing pi when the chain ignores (x, y).
class LossEvaluator {
public:
    LossEvaluator(const Landscape& L, const ControlledChain& C) : L_(L), C_(C) {}
    double operator()(std::span<const double> x, std::span<const double> y) {
        if (C_.parameter_dependent()) return averaged_loss(L_, C_, x, y);
        if (!pi_) pi_ = stationary_distribution(C_, x, y);
        double s = 0.0;
        for (std::size_t z = 0; z < pi_->support_size(); ++z) {
            if ((*pi_)[z] != 0.0) s += (*pi_)[z] * L_.eval(x, y, landscape_z(L_, z));
        }
        return s;
    }

private:
    const Landscape& L_;
    const ControlledChain& C_;
    std::optional<DiscreteMeasure> pi_;
};

}  // namespace

void advance(TwoScaleState& st, const Landscape& L, const ControlledChain& C, const StepSchedule& s, SgdMode mode,
             Stream& rng) {
    const std::size_t dx = L.dim_x(), dy = L.dim_y();
    if (st.x.size() != dx || st.y.size() != dy) throw Error(Errc::DimensionMismatch, "state dimensions");
    const double an = s.fast(st.n), bn = s.slow(st.n);
    if (mode == SgdMode::Instantaneous) {
        thread_local std::vector<double> g1, g2;
        g1.resize(dx);
        g2.resize(dy);
        st.noise_state = noise_step(C, st.x, st.y, st.noise_state, rng);
        const std::size_t z = landscape_z(L, st.noise_state);
        L.grad1_unchecked(st.x, st.y, z, g1);
        L.grad2_unchecked(st.x, st.y, z, g2);
        for (std::size_t i = 0; i < dx; ++i) st.x[i] -= an * g1[i];
        for (std::size_t j = 0; j < dy; ++j) st.y[j] -= bn * g2[j];
    } else {
        const GradMode gm = mode == SgdMode::AveragedFull ? GradMode::Full : GradMode::Frozen;
        const AveragedGrads g = averaged_grads(L, C, st.x, st.y, gm);
        for (std::size_t i = 0; i < dx; ++i) st.x[i] -= an * g.g1[i];
        for (std::size_t j = 0; j < dy; ++j) st.y[j] -= bn * g.g2[j];
    }
    ++st.n;
    if (diverged(st)) throw Error(Errc::NonFiniteIterate, "iterate diverged at n = " + std::to_string(st.n));
}

TwoScaleState sgd_step(const TwoScaleState& st, const Landscape& L, const ControlledChain& C, const StepSchedule& s,
                       SgdMode mode, Stream& rng) {
    TwoScaleState next = st;
    advance(next, L, C, s, mode, rng);
    return next;
}

TrajectoryRecord run(const LandscapePtr& L, const ChainPtr& C, const StepSchedule& s, SgdMode mode,
                     std::vector<double> x0, std::vector<double> y0, std::uint64_t n_steps, std::uint64_t seed,
                     const RunOptions& opts) {
    if (n_steps < 1) throw Error(Errc::ParamOutOfRange, "n_steps must be >= 1");
    if (opts.thin < 1) throw Error(Errc::ParamOutOfRange, "thin must be >= 1");
    if (L->noise_arity() != 1 && L->noise_arity() != C->n_states()) {
        throw Error(Errc::DimensionMismatch, L->name() + " noise arity differs from chain " + C->name());
    }
    if (opts.initial_noise_state >= C->n_states()) throw Error(Errc::IndexOutOfRange, "initial noise state");
    TrajectoryRecord rec;
    rec.landscape = L->name();
    rec.chain = C->name();
    rec.schedule = s.describe();
    rec.mode = std::string(mode_name(mode));
    rec.thin = opts.thin;
    rec.seed = seed;
    rec.dim_x = L->dim_x();
    rec.dim_y = L->dim_y();

    TwoScaleState st{std::move(x0), std::move(y0), opts.initial_noise_state, 0};
    if (st.x.size() != rec.dim_x || st.y.size() != rec.dim_y) throw Error(Errc::DimensionMismatch, "x0/y0 size");
    LossEvaluator loss(*L, *C);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto record = [&] { rec.push(st, opts.record_loss ? loss(st.x, st.y) : nan); };
    record();
    Stream rng(seed);
    for (std::uint64_t k = 0; k < n_steps; ++k) {
        try {
            advance(st, *L, *C, s, mode, rng);
        } catch (const Error& e) {
            if (e.code() == Errc::NonFiniteIterate) throw DivergenceError(e.what(), std::move(rec));
            throw;
        }
        if (st.n % opts.thin == 0) record();
    }
    return rec;
}

TrajectoryRecord single_scale_run(const LandscapePtr& V, double a, double sigma, std::vector<double> x0,
                                  std::uint64_t n_steps, std::uint64_t seed, std::size_t thin) {
    if (V->dim_y() != 0) throw Error(Errc::DimensionMismatch, "single-scale runs need an x-only landscape");
    if (x0.size() != V->dim_x()) throw Error(Errc::DimensionMismatch, "x0 size");
    if (!(a > 0.0) || !(sigma >= 0.0)) throw Error(Errc::ParamOutOfRange, "need a > 0 and sigma >= 0");
    if (thin < 1) throw Error(Errc::ParamOutOfRange, "thin must be >= 1");
    TrajectoryRecord rec;
    rec.landscape = V->name();
    rec.chain = "gaussian";
    rec.schedule = "constant(a=" + format_double(a) + ",sigma=" + format_double(sigma) + ")";
    rec.mode = "single_scale";
    rec.thin = thin;
    rec.seed = seed;
    rec.dim_x = V->dim_x();
    rec.dim_y = 0;
    const std::size_t d = V->dim_x();
    rec.n.reserve(static_cast<std::size_t>(n_steps / thin + 1));
    rec.x.reserve(static_cast<std::size_t>(n_steps / thin + 1) * d);

    TwoScaleState st{std::move(x0), {}, 0, 0};
    std::vector<double> g(d);
    const std::span<const double> no_y;
    rec.push(st, V->eval_unchecked(st.x, no_y, 0));
    Stream rng(seed);
    for (std::uint64_t k = 0; k < n_steps; ++k) {
        V->grad1_unchecked(st.x, no_y, 0, g);
        for (std::size_t i = 0; i < d; ++i) st.x[i] -= a * (g[i] + sigma * rng.normal());
        ++st.n;
        if (diverged(st)) {
            throw DivergenceError("iterate diverged at n = " + std::to_string(st.n), std::move(rec));
        }
        if (st.n % thin == 0) rec.push(st, V->eval_unchecked(st.x, no_y, 0));
    }
    return rec;
}

OdeTrajectory ode_flow(const LandscapePtr& L, const ChainPtr& C, std::vector<double> x0, std::vector<double> y0,
                       double epsilon, double T, double dt, GradMode mode, std::size_t record_every) {
    if (!(dt > 0.0) || dt > 0.01 / L->curvature_bound() * (1.0 + 1e-12)) {
        throw Error(Errc::ParamOutOfRange, "dt must lie in (0, 0.01 / curvature bound]");
    }
    if (!(T >= 0.0) || record_every < 1) throw Error(Errc::ParamOutOfRange, "need T >= 0 and record_every >= 1");
    const std::size_t dx = L->dim_x(), dy = L->dim_y();
    if (x0.size() != dx || y0.size() != dy) throw Error(Errc::DimensionMismatch, "x0/y0 size");

    OdeTrajectory out;
    out.dim_x = dx;
    out.dim_y = dy;
    std::vector<double> x = std::move(x0), y = std::move(y0);
    auto push = [&](double t) {
        out.t.push_back(t);
        out.x.insert(out.x.end(), x.begin(), x.end());
        out.y.insert(out.y.end(), y.begin(), y.end());
    };
    auto drift = [&](const std::vector<double>& xs, const std::vector<double>& ys, std::vector<double>& kx,
                     std::vector<double>& ky) {
        const AveragedGrads g = averaged_grads(*L, *C, xs, ys, mode);
        for (std::size_t i = 0; i < dx; ++i) kx[i] = -g.g1[i];
        for (std::size_t j = 0; j < dy; ++j) ky[j] = -epsilon * g.g2[j];
    };

    const auto steps = static_cast<std::uint64_t>(std::llround(T / dt));
    std::vector<double> k1x(dx), k2x(dx), k3x(dx), k4x(dx), k1y(dy), k2y(dy), k3y(dy), k4y(dy), tx(dx), ty(dy);
    push(0.0);
    for (std::uint64_t step = 0; step < steps; ++step) {
        drift(x, y, k1x, k1y);
        for (std::size_t i = 0; i < dx; ++i) tx[i] = x[i] + 0.5 * dt * k1x[i];
        for (std::size_t j = 0; j < dy; ++j) ty[j] = y[j] + 0.5 * dt * k1y[j];
        drift(tx, ty, k2x, k2y);
        for (std::size_t i = 0; i < dx; ++i) tx[i] = x[i] + 0.5 * dt * k2x[i];
        for (std::size_t j = 0; j < dy; ++j) ty[j] = y[j] + 0.5 * dt * k2y[j];
        drift(tx, ty, k3x, k3y);
        for (std::size_t i = 0; i < dx; ++i) tx[i] = x[i] + dt * k3x[i];
        for (std::size_t j = 0; j < dy; ++j) ty[j] = y[j] + dt * k3y[j];
        drift(tx, ty, k4x, k4y);
        double norm = 0.0;
        for (std::size_t i = 0; i < dx; ++i) {
            x[i] += dt / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            norm += std::abs(x[i]);
        }
        for (std::size_t j = 0; j < dy; ++j) {
            y[j] += dt / 6.0 * (k1y[j] + 2.0 * k2y[j] + 2.0 * k3y[j] + k4y[j]);
            norm += std::abs(y[j]);
        }
        if (!std::isfinite(norm) || norm > kDivergenceBound) {
            throw Error(Errc::NonFiniteIterate, "ode_flow diverged");
        }
        if ((step + 1) % record_every == 0 || step + 1 == steps) push(static_cast<double>(step + 1) * dt);
    }
    return out;
}

}  // namespace memlab
