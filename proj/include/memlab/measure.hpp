// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// Probability measures on a finite indexed support {0, ..., k-1}.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "memlab/rng.hpp"

namespace memlab {

/// Immutable probability vector. Weights are nonnegative and sum to one
/// within 1e-12. An optional label table maps support indices to user values.
class DiscreteMeasure {
public:
    static constexpr double kSumTolerance = 1e-12;

    /// Normalizes `weights`. Throws NegativeWeight or ZeroMass.
    static DiscreteMeasure from_weights(std::span<const double> weights);
    static DiscreteMeasure dirac(std::size_t support_size, std::size_t index);
    static DiscreteMeasure uniform(std::size_t support_size);

    std::size_t support_size() const noexcept { return weights_.size(); }
    std::span<const double> weights() const noexcept { return weights_; }
    double operator[](std::size_t i) const { return weights_[i]; }

    const std::vector<double>& labels() const noexcept { return labels_; }
    /// Copy carrying one label per support point.
    DiscreteMeasure with_labels(std::vector<double> labels) const;

    bool operator==(const DiscreteMeasure& other) const { return weights_ == other.weights_; }

private:
    explicit DiscreteMeasure(std::vector<double> weights) : weights_(std::move(weights)) {}

    std::vector<double> weights_;
    std::vector<double> labels_;

    friend DiscreteMeasure mix(const DiscreteMeasure&, const DiscreteMeasure&, double);
    friend DiscreteMeasure empirical_fit(std::span<const std::size_t>, std::size_t);
    friend DiscreteMeasure empirical_from_counts(std::span<const std::size_t>);
};

DiscreteMeasure new_measure(std::span<const double> weights);

/// n i.i.d. indices from `mu`; consumes exactly n uniform draws.
std::vector<std::size_t> sample(const DiscreteMeasure& mu, std::size_t n, Stream& rng);

/// weight[i] = count(i) / samples.size(). Throws IndexOutOfRange, ZeroMass on
/// empty input.
DiscreteMeasure empirical_fit(std::span<const std::size_t> samples, std::size_t support_size);

/// Empirical measure from per-index counts (total must be positive).
DiscreteMeasure empirical_from_counts(std::span<const std::size_t> counts);

/// a * mu0 + (1 - a) * mun. Endpoints a = 0 and a = 1 return the operands
/// bit for bit.
DiscreteMeasure mix(const DiscreteMeasure& mu0, const DiscreteMeasure& mun, double a);

double tv_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Shannon entropy in nats, 0 log 0 = 0.
double entropy(const DiscreteMeasure& mu);

/// Index i with w_i >= 1 - tol, if any. tol must lie in (0, 0.5).
std::optional<std::size_t> is_dirac(const DiscreteMeasure& mu, double tol);

/// `support_size,w0,w1,...` with round-trip precision.
std::string to_csv_row(const DiscreteMeasure& mu);
DiscreteMeasure from_csv_row(const std::string& row);

}  // namespace memlab
