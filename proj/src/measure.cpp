// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "memlab/measure.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "memlab/csv.hpp"
#include "memlab/error.hpp"

namespace memlab {

DiscreteMeasure DiscreteMeasure::from_weights(std::span<const double> weights) {
    if (weights.empty()) throw Error(Errc::ZeroMass, "empty weight vector");
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
            throw Error(Errc::NegativeWeight, "weight " + std::to_string(i) + " is negative or not finite");
        }
        total += weights[i];
    }
    if (total <= 0.0) throw Error(Errc::ZeroMass, "all weights are zero");
    std::vector<double> w(weights.begin(), weights.end());
    if (std::abs(total - 1.0) > kSumTolerance) {
        for (double& v : w) v /= total;
    }
    return DiscreteMeasure(std::move(w));
}

DiscreteMeasure DiscreteMeasure::dirac(std::size_t support_size, std::size_t index) {
    if (index >= support_size) throw Error(Errc::IndexOutOfRange, "dirac index outside support");
    std::vector<double> w(support_size, 0.0);
    w[index] = 1.0;
    return DiscreteMeasure(std::move(w));
}

DiscreteMeasure DiscreteMeasure::uniform(std::size_t support_size) {
    if (support_size == 0) throw Error(Errc::ZeroMass, "empty support");
    return DiscreteMeasure(std::vector<double>(support_size, 1.0 / static_cast<double>(support_size)));
}

DiscreteMeasure DiscreteMeasure::with_labels(std::vector<double> labels) const {
    if (labels.size() != weights_.size()) throw Error(Errc::SupportMismatch, "label table size");
    DiscreteMeasure copy = *this;
    copy.labels_ = std::move(labels);
    return copy;
}

DiscreteMeasure new_measure(std::span<const double> weights) { return DiscreteMeasure::from_weights(weights); }

std::vector<std::size_t> sample(const DiscreteMeasure& mu, std::size_t n, Stream& rng) {
    std::vector<std::size_t> out(n);
    for (auto& v : out) v = rng.categorical(mu.weights());
    return out;
}

DiscreteMeasure empirical_fit(std::span<const std::size_t> samples, std::size_t support_size) {
    if (samples.empty()) throw Error(Errc::ZeroMass, "no samples");
    std::vector<std::size_t> counts(support_size, 0);
    for (std::size_t s : samples) {
        if (s >= support_size) throw Error(Errc::IndexOutOfRange, "sample index " + std::to_string(s));
        ++counts[s];
    }
    return empirical_from_counts(counts);
}

DiscreteMeasure empirical_from_counts(std::span<const std::size_t> counts) {
    const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    if (total == 0) throw Error(Errc::ZeroMass, "no samples");
    std::vector<double> w(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        w[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    }
    return DiscreteMeasure(std::move(w));
}

DiscreteMeasure mix(const DiscreteMeasure& mu0, const DiscreteMeasure& mun, double a) {
    if (mu0.support_size() != mun.support_size()) throw Error(Errc::SupportMismatch, "mix operands");
    if (!(a >= 0.0 && a <= 1.0)) throw Error(Errc::ParamOutOfRange, "mixing weight outside [0, 1]");
    if (a == 0.0) return mun;
    if (a == 1.0) return mu0;
    std::vector<double> w(mu0.support_size());
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = a * mu0[i] + (1.0 - a) * mun[i];
        total += w[i];
    }
    if (std::abs(total - 1.0) > DiscreteMeasure::kSumTolerance) {
        for (double& v : w) v /= total;
    }
    return DiscreteMeasure(std::move(w));
}

double tv_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    if (mu.support_size() != nu.support_size()) throw Error(Errc::SupportMismatch, "tv_distance operands");
    double s = 0.0;
    for (std::size_t i = 0; i < mu.support_size(); ++i) s += std::abs(mu[i] - nu[i]);
    return 0.5 * s;
}

double entropy(const DiscreteMeasure& mu) {
    double h = 0.0;
    for (double w : mu.weights()) {
        if (w > 0.0) h -= w * std::log(w);
    }
    return h;
}

std::optional<std::size_t> is_dirac(const DiscreteMeasure& mu, double tol) {
    if (!(tol > 0.0 && tol < 0.5)) throw Error(Errc::ParamOutOfRange, "dirac tolerance outside (0, 0.5)");
    for (std::size_t i = 0; i < mu.support_size(); ++i) {
        if (mu[i] >= 1.0 - tol) return i;
    }
    return std::nullopt;
}

std::string to_csv_row(const DiscreteMeasure& mu) {
    std::string row = std::to_string(mu.support_size());
    for (double w : mu.weights()) {
        row += ',';
        row += format_double(w);
    }
    return row;
}

DiscreteMeasure from_csv_row(const std::string& row) {
    std::stringstream ss(row);
    std::string cell;
    if (!std::getline(ss, cell, ',')) throw Error(Errc::ConfigParse, "empty measure row");
    const std::size_t k = std::stoul(cell);
    std::vector<double> w;
    while (std::getline(ss, cell, ',')) w.push_back(std::stod(cell));
    if (w.size() != k) throw Error(Errc::SupportMismatch, "row declares " + std::to_string(k) + " weights");
    return DiscreteMeasure::from_weights(w);
}

}  // namespace memlab
