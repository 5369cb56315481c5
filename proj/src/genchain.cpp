// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "memlab/genchain.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

#include "memlab/error.hpp"

namespace memlab {

void GenChainConfig::validate() const {
    if (!(a >= 0.0 && a <= 1.0)) throw Error(Errc::ParamOutOfRange, "a must lie in [0, 1]");
    if (samples_per_generation < 1) throw Error(Errc::ParamOutOfRange, "N must be >= 1");
    if (max_steps < 1) throw Error(Errc::ParamOutOfRange, "max_steps must be >= 1");
    if (!(dirac_tol > 0.0 && dirac_tol < 0.5)) throw Error(Errc::ParamOutOfRange, "dirac_tol outside (0, 0.5)");
}

DiscreteMeasure chain_step(const DiscreteMeasure& mu_n, const GenChainConfig& cfg, Stream& rng) {
    if (mu_n.support_size() != cfg.mu0.support_size()) {
        throw Error(Errc::SupportMismatch, "chain state and mu0 differ in support size");
    }
    const DiscreteMeasure law = mix(cfg.mu0, mu_n, cfg.a);
    std::vector<std::size_t> counts(law.support_size(), 0);
    for (std::size_t i = 0; i < cfg.samples_per_generation; ++i) ++counts[rng.categorical(law.weights())];
    return empirical_from_counts(counts);
}

namespace {

bool dirac_is_absorbing(const GenChainConfig& cfg, std::size_t index) {
    return cfg.a == 0.0 || cfg.mu0[index] == 1.0;
}

}  // namespace

AbsorptionReport run_until_absorbed(const GenChainConfig& cfg, Stream& rng) {
    cfg.validate();
    AbsorptionReport report;
    DiscreteMeasure mu = cfg.mu0;
    constexpr std::size_t kTail = 1000;
    std::vector<double> tail(kTail, 0.0);
    std::size_t tail_count = 0;

    auto observe = [&](const DiscreteMeasure& m) {
        const double h = entropy(m);
        if (cfg.record_entropy) report.entropy_trace.push_back(h);
        return h;
    };
    observe(mu);

    auto absorbed_at = [&](const DiscreteMeasure& m) -> std::optional<std::size_t> {
        auto idx = is_dirac(m, cfg.dirac_tol);
        if (idx && dirac_is_absorbing(cfg, *idx)) return idx;
        return std::nullopt;
    };

    if (auto idx = absorbed_at(mu)) {
        report.absorbed = true;
        report.absorbing_index = idx;
        report.steps_to_absorb = 0;
    }
    while (!report.absorbed && report.steps < cfg.max_steps) {
        mu = chain_step(mu, cfg, rng);
        ++report.steps;
        const double h = observe(mu);
        tail[tail_count++ % kTail] = h;
        if (auto idx = is_dirac(mu, cfg.dirac_tol)) {
            ++report.dirac_visits;
            if (dirac_is_absorbing(cfg, *idx)) {
                report.absorbed = true;
                report.absorbing_index = idx;
                report.steps_to_absorb = report.steps;
            }
        }
    }
    const std::size_t n_tail = std::min(tail_count, kTail);
    if (n_tail > 0) {
        double s = 0.0;
        for (std::size_t i = 0; i < n_tail; ++i) s += tail[i];
        report.mean_entropy_tail = s / static_cast<double>(n_tail);
    } else {
        report.mean_entropy_tail = entropy(mu);
    }
    report.final_measure = mu;
    return report;
}

std::size_t empirical_state_count(std::size_t n, std::size_t k) {
    // C(n + k - 1, k - 1) with saturation.
    const std::size_t r = k - 1;
    double c = 1.0;
    for (std::size_t i = 1; i <= r; ++i) {
        c = c * static_cast<double>(n + i) / static_cast<double>(i);
        if (c > 1e18) return static_cast<std::size_t>(-1);
    }
    return static_cast<std::size_t>(std::llround(c));
}

namespace {

void enumerate_compositions(std::size_t n, std::size_t k, std::vector<std::size_t>& current,
                            std::vector<std::vector<std::size_t>>& out) {
    if (current.size() + 1 == k) {
        current.push_back(n);
        out.push_back(current);
        current.pop_back();
        return;
    }
    for (std::size_t c = 0; c <= n; ++c) {
        current.push_back(c);
        enumerate_compositions(n - c, k, current, out);
        current.pop_back();
    }
}

double log_multinomial(const std::vector<std::size_t>& counts, const std::vector<double>& log_p, std::size_t n) {
    double lp = std::lgamma(static_cast<double>(n) + 1.0);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0) continue;
        if (!std::isfinite(log_p[i])) return -INFINITY;
        lp += static_cast<double>(counts[i]) * log_p[i] - std::lgamma(static_cast<double>(counts[i]) + 1.0);
    }
    return lp;
}

}  // namespace

DiscreteMeasure absorption_oracle(const GenChainConfig& cfg, std::size_t max_states) {
    cfg.validate();
    if (cfg.a != 0.0) throw Error(Errc::NotImplementedForPositiveA, "absorption oracle requires a = 0");
    const std::size_t k = cfg.mu0.support_size();
    const std::size_t n = cfg.samples_per_generation;
    const std::size_t n_states = empirical_state_count(n, k);
    if (n_states > max_states || n_states > 1000000) {
        throw Error(Errc::StateSpaceTooLarge, std::to_string(n_states) + " empirical states");
    }

    std::vector<std::size_t> start(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double scaled = cfg.mu0[i] * static_cast<double>(n);
        const double rounded = std::round(scaled);
        if (std::abs(scaled - rounded) > 1e-9) {
            throw Error(Errc::Mu0NotRepresentable, "N * mu0 is not integral");
        }
        start[i] = static_cast<std::size_t>(rounded);
    }

    std::vector<std::vector<std::size_t>> states;
    std::vector<std::size_t> scratch;
    enumerate_compositions(n, k, scratch, states);

    auto dirac_of = [&](const std::vector<std::size_t>& c) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < k; ++i)
            if (c[i] == n) return i;
        return std::nullopt;
    };
    if (auto d = dirac_of(start)) return DiscreteMeasure::dirac(k, *d);

    std::map<std::vector<std::size_t>, std::size_t> transient_index;
    std::vector<std::size_t> transient;
    for (std::size_t s = 0; s < states.size(); ++s) {
        if (!dirac_of(states[s])) {
            transient_index[states[s]] = transient.size();
            transient.push_back(s);
        }
    }

    const auto m = static_cast<Eigen::Index>(transient.size());
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(m, m);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(k));
    std::vector<double> log_p(k);
    for (Eigen::Index row = 0; row < m; ++row) {
        const auto& from = states[transient[static_cast<std::size_t>(row)]];
        for (std::size_t i = 0; i < k; ++i) {
            log_p[i] = from[i] == 0 ? -INFINITY : std::log(static_cast<double>(from[i]) / static_cast<double>(n));
        }
        for (const auto& to : states) {
            const double lp = log_multinomial(to, log_p, n);
            if (!std::isfinite(lp)) continue;
            const double p = std::exp(lp);
            if (auto d = dirac_of(to)) {
                rhs(row, static_cast<Eigen::Index>(*d)) += p;
            } else {
                system(row, static_cast<Eigen::Index>(transient_index.at(to))) -= p;
            }
        }
    }
    const Eigen::MatrixXd absorb = system.partialPivLu().solve(rhs);
    const auto start_row = static_cast<Eigen::Index>(transient_index.at(start));
    std::vector<double> w(k);
    for (std::size_t i = 0; i < k; ++i) w[i] = std::max(0.0, absorb(start_row, static_cast<Eigen::Index>(i)));
    return DiscreteMeasure::from_weights(w);
}

double check_barycenter(const DiscreteMeasure& mu, const GenChainConfig& cfg, std::size_t replications,
                        Stream& rng) {
    if (replications == 0) throw Error(Errc::ParamOutOfRange, "replications must be positive");
    const std::size_t k = mu.support_size();
    std::vector<double> sum(k, 0.0);
    for (std::size_t r = 0; r < replications; ++r) {
        const DiscreteMeasure next = chain_step(mu, cfg, rng);
        for (std::size_t i = 0; i < k; ++i) sum[i] += next[i];
    }
    const DiscreteMeasure target = mix(cfg.mu0, mu, cfg.a);
    double worst = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        worst = std::max(worst, std::abs(sum[i] / static_cast<double>(replications) - target[i]));
    }
    return worst;
}

}  // namespace memlab
