// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// Measure-valued generative chain. Each generation draws N i.i.d. samples
// from a * mu0 + (1 - a) * mu_n and refits the empirical distribution, so
// mu_n is the conditional expectation of mu_{n+1}. For a = 0 every Dirac
// measure is absorbing and the chain collapses onto one of them; for a > 0
// fresh data keeps it away from collapse.

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "memlab/measure.hpp"
#include "memlab/rng.hpp"

namespace memlab {

struct GenChainConfig {
    DiscreteMeasure mu0 = DiscreteMeasure::uniform(2);
    double a = 0.0;                      // fresh-data weight
    std::size_t samples_per_generation = 10;
    std::size_t max_steps = 100000;
    double dirac_tol = 1e-9;
    bool record_entropy = true;

    /// Throws ParamOutOfRange on a violated invariant.
    void validate() const;
};

struct AbsorptionReport {
    bool absorbed = false;
    std::optional<std::size_t> absorbing_index;
    std::optional<std::size_t> steps_to_absorb;
    std::vector<double> entropy_trace;  // entropy of mu_0, mu_1, ... (empty unless recorded)
    DiscreteMeasure final_measure = DiscreteMeasure::uniform(1);
    std::size_t steps = 0;              // generations performed
    std::size_t dirac_visits = 0;       // generations ending on a (possibly transient) Dirac
    double mean_entropy_tail = 0.0;     // mean entropy over the last min(1000, steps) generations
};

/// One generation; consumes samples_per_generation uniform draws.
DiscreteMeasure chain_step(const DiscreteMeasure& mu_n, const GenChainConfig& cfg, Stream& rng);

/// Iterates from mu0 until an absorbing Dirac is reached or max_steps elapse.
/// A Dirac at i counts as absorbing only when the kernel keeps it fixed,
/// i.e. a == 0 or mu0 is itself the Dirac at i; transient Dirac visits with
/// a > 0 are counted in dirac_visits instead.
AbsorptionReport run_until_absorbed(const GenChainConfig& cfg, Stream& rng);

/// Exact absorption law for a = 0 over the Dirac states, by a linear solve
/// on the chain of empirical measures with multinomial transitions. Returns
/// a measure whose weight i is P(collapse onto index i).
DiscreteMeasure absorption_oracle(const GenChainConfig& cfg, std::size_t max_states = 5000);

/// Number of empirical-measure states, C(N + k - 1, k - 1) (saturating).
std::size_t empirical_state_count(std::size_t n, std::size_t k);

/// Max componentwise gap between the Monte-Carlo mean of mu_{n+1} given
/// mu_n = mu and mix(mu0, mu, a).
double check_barycenter(const DiscreteMeasure& mu, const GenChainConfig& cfg, std::size_t replications,
                        Stream& rng);

}  // namespace memlab
