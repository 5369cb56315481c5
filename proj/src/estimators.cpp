// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "memlab/estimators.hpp"

#include <cmath>

#include "memlab/error.hpp"

namespace memlab {

void EstimatorConfig::validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw Error(Errc::ParamOutOfRange, "delta must lie in (0, 1)");
    if (!(clip_norm > 0.0)) throw Error(Errc::ParamOutOfRange, "clip_norm must be positive");
    if (batch < 1) throw Error(Errc::ParamOutOfRange, "batch must be >= 1");
}

namespace {

std::size_t landscape_z(const Landscape& L, std::size_t z) { return L.noise_arity() == 1 ? 0 : z; }

void clip(std::vector<double>& g, double limit) {
    if (!std::isfinite(limit)) return;
    double n2 = 0.0;
    for (double v : g) n2 += v * v;
    const double n = std::sqrt(n2);
    if (n > limit) {
        const double s = limit / n;
        for (double& v : g) v *= s;
    }
}

// Shared tail: move the noise at the perturbed point and evaluate there.
double perturbed_value(const Landscape& L, const ControlledChain& C, std::span<const double> x,
                       std::span<const double> y, const std::vector<double>& xi, double delta, std::size_t& state,
                       Stream& rng) {
    thread_local std::vector<double> xp;
    xp.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) xp[i] = x[i] + delta * xi[i];
    state = noise_step(C, xp, y, state, rng);
    return L.eval(xp, y, landscape_z(L, state));
}

}  // namespace

Estimate smoothed_grad_estimate(const Landscape& L, const ControlledChain& C, std::span<const double> x,
                                std::span<const double> y, const EstimatorConfig& cfg, std::size_t noise_state,
                                Stream& rng) {
    const std::size_t s = L.dim_x();
    std::vector<double> xi(s);
    for (double& v : xi) v = rng.normal();
    Estimate e{std::vector<double>(s), noise_state};
    const double f = perturbed_value(L, C, x, y, xi, cfg.delta, e.noise_state, rng);
    for (std::size_t i = 0; i < s; ++i) e.gradient[i] = f * xi[i] / cfg.delta;
    clip(e.gradient, cfg.clip_norm);
    return e;
}

Estimate spsa_grad_estimate(const Landscape& L, const ControlledChain& C, std::span<const double> x,
                            std::span<const double> y, const EstimatorConfig& cfg, std::size_t noise_state,
                            Stream& rng) {
    const std::size_t s = L.dim_x();
    std::vector<double> xi(s);
    for (double& v : xi) v = rng.rademacher();
    Estimate e{std::vector<double>(s), noise_state};
    const double f = perturbed_value(L, C, x, y, xi, cfg.delta, e.noise_state, rng);
    for (std::size_t i = 0; i < s; ++i) e.gradient[i] = f / (cfg.delta * xi[i]);
    clip(e.gradient, cfg.clip_norm);
    return e;
}

Estimate single_estimate(const Landscape& L, const ControlledChain& C, std::span<const double> x,
                         std::span<const double> y, const EstimatorConfig& cfg, std::size_t noise_state,
                         Stream& rng) {
    return cfg.kind == EstimatorKind::SmoothedGaussian ? smoothed_grad_estimate(L, C, x, y, cfg, noise_state, rng)
                                                       : spsa_grad_estimate(L, C, x, y, cfg, noise_state, rng);
}

Estimate averaged_estimate(const Landscape& L, const ControlledChain& C, std::span<const double> x,
                           std::span<const double> y, const EstimatorConfig& cfg, std::size_t noise_state,
                           Stream& rng) {
    cfg.validate();
    if (cfg.batch == 1) return single_estimate(L, C, x, y, cfg, noise_state, rng);
    Estimate acc{std::vector<double>(L.dim_x(), 0.0), noise_state};
    for (std::size_t m = 0; m < cfg.batch; ++m) {
        const Estimate e = single_estimate(L, C, x, y, cfg, acc.noise_state, rng);
        for (std::size_t i = 0; i < acc.gradient.size(); ++i) acc.gradient[i] += e.gradient[i];
        acc.noise_state = e.noise_state;
    }
    for (double& v : acc.gradient) v /= static_cast<double>(cfg.batch);
    return acc;
}

double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw Error(Errc::DimensionMismatch, "need >= 2 paired points");
    double mx = 0.0, my = 0.0;
    const auto n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += std::log(xs[i]);
        my += std::log(ys[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = std::log(xs[i]) - mx;
        sxy += dx * (std::log(ys[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

BiasCurve bias_curve(EstimatorKind kind, const Landscape& L, const ControlledChain& C, std::span<const double> x,
                     std::span<const double> y, const std::vector<double>& deltas, std::size_t samples,
                     Stream& rng, double clip_norm) {
    if (samples < 2) throw Error(Errc::ParamOutOfRange, "need at least 2 samples per delta");
    const std::vector<double> truth = averaged_grads(L, C, x, y, GradMode::Full).g1;
    const std::size_t s = L.dim_x();
    BiasCurve curve;
    std::vector<double> ds, bs;
    for (std::size_t di = 0; di < deltas.size(); ++di) {
        EstimatorConfig cfg{kind, deltas[di], clip_norm, 1};
        cfg.validate();
        Stream sub = rng.substream(di);
        std::vector<double> mean(s, 0.0), m2(s, 0.0);
        std::size_t state = 0;
        for (std::size_t k = 0; k < samples; ++k) {
            const Estimate e = single_estimate(L, C, x, y, cfg, state, sub);
            state = e.noise_state;
            // Welford update per coordinate.
            for (std::size_t i = 0; i < s; ++i) {
                const double d = e.gradient[i] - mean[i];
                mean[i] += d / static_cast<double>(k + 1);
                m2[i] += d * (e.gradient[i] - mean[i]);
            }
        }
        BiasPoint p;
        p.delta = deltas[di];
        double b2 = 0.0, var = 0.0, se2 = 0.0;
        for (std::size_t i = 0; i < s; ++i) {
            const double b = mean[i] - truth[i];
            const double v = m2[i] / static_cast<double>(samples - 1);
            b2 += b * b;
            var += v;
            se2 += v / static_cast<double>(samples);
        }
        p.bias_norm = std::sqrt(b2);
        p.variance = var;
        p.bias_se = std::sqrt(se2);
        curve.points.push_back(p);
        ds.push_back(p.delta);
        bs.push_back(std::max(p.bias_norm, 1e-300));
    }
    curve.slope = ds.size() >= 2 ? loglog_slope(ds, bs) : 0.0;
    return curve;
}

TrajectoryRecord run_with_estimator(const LandscapePtr& L, const ChainPtr& C, const StepSchedule& s,
                                    const EstimatorConfig& cfg, std::vector<double> x0, std::vector<double> y0,
                                    std::uint64_t n_steps, std::uint64_t seed, std::size_t thin) {
    cfg.validate();
    if (thin < 1) throw Error(Errc::ParamOutOfRange, "thin must be >= 1");
    TrajectoryRecord rec;
    rec.landscape = L->name();
    rec.chain = C->name();
    rec.schedule = s.describe();
    rec.mode = cfg.kind == EstimatorKind::SmoothedGaussian ? "estimator_gaussian" : "estimator_spsa";
    rec.thin = thin;
    rec.seed = seed;
    rec.dim_x = L->dim_x();
    rec.dim_y = L->dim_y();
    TwoScaleState st{std::move(x0), std::move(y0), 0, 0};
    if (st.x.size() != rec.dim_x || st.y.size() != rec.dim_y) throw Error(Errc::DimensionMismatch, "x0/y0 size");
    std::vector<double> g2(rec.dim_y);
    auto loss = [&] { return averaged_loss(*L, *C, st.x, st.y); };
    rec.push(st, loss());
    Stream rng(seed);
    for (std::uint64_t k = 0; k < n_steps; ++k) {
        const double an = s.fast(st.n), bn = s.slow(st.n);
        const Estimate e = averaged_estimate(*L, *C, st.x, st.y, cfg, st.noise_state, rng);
        st.noise_state = e.noise_state;
        L->grad2(st.x, st.y, landscape_z(*L, st.noise_state), g2);
        for (std::size_t i = 0; i < rec.dim_x; ++i) st.x[i] -= an * e.gradient[i];
        for (std::size_t j = 0; j < rec.dim_y; ++j) st.y[j] -= bn * g2[j];
        ++st.n;
        double norm = 0.0;
        for (double v : st.x) norm += std::abs(v);
        for (double v : st.y) norm += std::abs(v);
        if (!std::isfinite(norm) || norm > kDivergenceBound) {
            throw DivergenceError("iterate diverged at n = " + std::to_string(st.n), std::move(rec));
        }
        if (st.n % thin == 0) rec.push(st, loss());
    }
    return rec;
}

}  // namespace memlab
