// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "memlab/diffusion.hpp"

#include <algorithm>
#include <cmath>

#include "memlab/error.hpp"

namespace memlab {

void OUParams::validate() const {
    if (!(upsilon > 0.0)) throw Error(Errc::ParamOutOfRange, "upsilon must be positive");
    if (!(horizon > 0.0)) throw Error(Errc::ParamOutOfRange, "horizon must be positive");
    if (!(dt > 0.0 && dt <= horizon / 10.0)) throw Error(Errc::ParamOutOfRange, "dt must lie in (0, T/10]");
    if (!(data_var > 0.0)) throw Error(Errc::ParamOutOfRange, "data_var must be positive");
}

std::size_t OUParams::steps() const { return static_cast<std::size_t>(std::llround(horizon / dt)); }

std::vector<double> forward_simulate(const OUParams& p, double x0, Stream& rng, double noise_scale) {
    p.validate();
    const std::size_t n = p.steps();
    const double sq = std::sqrt(p.dt) * noise_scale;
    std::vector<double> path(n + 1);
    path[0] = x0;
    for (std::size_t k = 0; k < n; ++k) {
        const double noise = noise_scale == 0.0 ? 0.0 : sq * rng.normal();
        path[k + 1] = path[k] - p.upsilon * path[k] * p.dt + noise;
    }
    return path;
}

Gaussian1D ou_conditional(const OUParams& p, double x0, double t) {
    const double decay = std::exp(-p.upsilon * t);
    return {x0 * decay, -std::expm1(-2.0 * p.upsilon * t) / (2.0 * p.upsilon)};
}

Gaussian1D ou_marginal(const OUParams& p, double t) {
    const double decay = std::exp(-p.upsilon * t);
    const Gaussian1D c = ou_conditional(p, 0.0, t);
    return {p.data_mean * decay, p.data_var * decay * decay + c.var};
}

double analytic_score(double mean, double var, double x) {
    if (!(var > 0.0)) throw Error(Errc::DegenerateVariance, "score needs positive variance");
    return (mean - x) / var;
}

ScoreModel::ScoreModel(std::vector<double> knots, std::vector<double> slope, std::vector<double> intercept)
    : knots_(std::move(knots)), slope_(std::move(slope)), intercept_(std::move(intercept)) {
    if (knots_.size() < 2) throw Error(Errc::ParamOutOfRange, "need at least two knots");
    if (slope_.size() != knots_.size() || intercept_.size() != knots_.size()) {
        throw Error(Errc::DimensionMismatch, "one slope and intercept per knot");
    }
    for (std::size_t i = 0; i < knots_.size(); ++i) {
        if (i > 0 && !(knots_[i] > knots_[i - 1])) throw Error(Errc::ParamOutOfRange, "knots must increase");
        if (!std::isfinite(slope_[i]) || !std::isfinite(intercept_[i])) {
            throw Error(Errc::NonFiniteIterate, "non-finite score coefficient");
        }
    }
    if (!(knots_.front() > 0.0)) throw Error(Errc::ParamOutOfRange, "knots must be positive");
}

ScoreModel ScoreModel::zeros(std::vector<double> knots) {
    const std::size_t n = knots.size();
    return ScoreModel(std::move(knots), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0));
}

std::vector<double> ScoreModel::uniform_knots(double horizon, std::size_t count) {
    std::vector<double> k(count);
    for (std::size_t i = 0; i < count; ++i) k[i] = horizon * static_cast<double>(i + 1) / static_cast<double>(count);
    return k;
}

double ScoreModel::operator()(double x, double t) const {
    if (t <= knots_.front()) return slope_.front() * x + intercept_.front();
    if (t >= knots_.back()) return slope_.back() * x + intercept_.back();
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const auto j = static_cast<std::size_t>(it - knots_.begin());
    const std::size_t i = j - 1;
    const double w = (t - knots_[i]) / (knots_[j] - knots_[i]);
    const double s = (1.0 - w) * slope_[i] + w * slope_[j];
    const double c = (1.0 - w) * intercept_[i] + w * intercept_[j];
    return s * x + c;
}

TrainingResult score_training_run(const OUParams& p, ScoreModel model, const StepSchedule& schedule,
                                  std::uint64_t n_iters, std::size_t batch, Stream& rng) {
    p.validate();
    if (batch < 1) throw Error(Errc::ParamOutOfRange, "batch must be >= 1");
    const std::size_t K = model.knots().size();
    std::vector<Gaussian1D> cond(K);
    std::vector<double> decay(K);
    for (std::size_t k = 0; k < K; ++k) {
        cond[k] = ou_conditional(p, 0.0, model.knots()[k]);
        decay[k] = std::exp(-p.upsilon * model.knots()[k]);
    }
    const double data_sd = std::sqrt(p.data_var);
    TrainingResult out{std::move(model), {}};
    out.loss_trace.reserve(static_cast<std::size_t>(n_iters));
    std::vector<double> gs(K), gc(K);
    auto& slope = out.model.slope();
    auto& intercept = out.model.intercept();
    const double inv_batch = 1.0 / static_cast<double>(batch);
    for (std::uint64_t it = 0; it < n_iters; ++it) {
        std::fill(gs.begin(), gs.end(), 0.0);
        std::fill(gc.begin(), gc.end(), 0.0);
        double loss = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
            const auto k = std::min(K - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(K)));
            const double x0 = p.data_mean + data_sd * rng.normal();
            const double mean = x0 * decay[k];
            const double xt = mean + std::sqrt(cond[k].var) * rng.normal();
            const double target = analytic_score(mean, cond[k].var, xt);
            const double resid = slope[k] * xt + intercept[k] - target;
            loss += resid * resid;
            gs[k] += 2.0 * resid * xt;
            gc[k] += 2.0 * resid;
        }
        out.loss_trace.push_back(loss * inv_batch);
        const double a = schedule.fast(it);
        for (std::size_t k = 0; k < K; ++k) {
            slope[k] -= a * gs[k] * inv_batch;
            intercept[k] -= a * gc[k] * inv_batch;
            if (!std::isfinite(slope[k]) || !std::isfinite(intercept[k])) {
                throw Error(Errc::NonFiniteIterate, "score training diverged at iteration " + std::to_string(it));
            }
        }
    }
    return out;
}

namespace {

template <typename Sink>
double reverse_impl(const OUParams& p, const ScoreFn& score, double xT, Stream& rng, Sink&& sink) {
    p.validate();
    const std::size_t n = p.steps();
    const double sq = std::sqrt(p.dt);
    double y = xT;
    sink(y);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * p.dt;
        y += (p.upsilon * y + score(y, p.horizon - t)) * p.dt + sq * rng.normal();
        if (!std::isfinite(y)) throw Error(Errc::NonFiniteIterate, "reverse path diverged");
        sink(y);
    }
    return y;
}

}  // namespace

std::vector<double> reverse_simulate(const OUParams& p, const ScoreFn& score, double xT, Stream& rng) {
    std::vector<double> path;
    path.reserve(p.steps() + 1);
    reverse_impl(p, score, xT, rng, [&](double v) { path.push_back(v); });
    return path;
}

double reverse_sample(const OUParams& p, const ScoreFn& score, double xT, Stream& rng) {
    return reverse_impl(p, score, xT, rng, [](double) {});
}

ScoreFn marginal_score(const OUParams& p) {
    return [p](double x, double t) {
        const Gaussian1D m = ou_marginal(p, t);
        return analytic_score(m.mean, m.var, x);
    };
}

}  // namespace memlab
