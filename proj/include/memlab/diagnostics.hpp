// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// Trajectory analysis: branch tracking, memorization events, occupation of
// regions around minima, Hwang weight predictions and an empirical Gibbs
// inversion of the stationary histogram.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "memlab/landscape.hpp"
#include "memlab/sgd.hpp"

namespace memlab {

struct TrackingResult {
    std::vector<double> error;         // min_i |x_n - lambda_i(y_n)|, +inf with no branch present
    std::vector<std::size_t> branch;   // argmin branch index
};

/// Throws NoBranchMetadata when the landscape has no branches.
TrackingResult tracking_error(const TrajectoryRecord& tr, const Landscape& L);

struct MemorizationEvent {
    std::size_t branch_index = 0;
    std::uint64_t start_n = 0;  // step index of the first record in the stretch
    std::uint64_t end_n = 0;    // step index of the last record in the stretch
    std::size_t records = 0;
    double mean_tracking_error = 0.0;
    double y_drift = 0.0;       // |y_end - y_start|
};

/// Maximal runs of consecutive records with error < tol on one branch, of at
/// least min_len records.
std::vector<MemorizationEvent> detect_memorization(const TrajectoryRecord& tr, const Landscape& L, double tol,
                                                   std::size_t min_len);
std::vector<MemorizationEvent> detect_memorization(const TrajectoryRecord& tr, const TrackingResult& tracking,
                                                   double tol, std::size_t min_len);

/// Sum of event records over total records.
double memorized_fraction(const std::vector<MemorizationEvent>& events, std::size_t total_records);

/// Ball (interval in 1-D) of points with |x - center| < radius.
struct Region {
    std::vector<double> center;
    double radius = 0.0;
    /// Interval [lo, hi) for 1-D basins; when set, center/radius are ignored.
    std::optional<std::pair<double, double>> interval;

    bool contains(std::span<const double> x) const;
};

/// Balls of radius 1/4 of the smallest distance between centers.
std::vector<Region> default_regions(const std::vector<std::vector<double>>& centers);

/// 1-D basins split at the given saddles: (-inf, s_0), [s_0, s_1), ...
std::vector<Region> basin_regions_1d(const std::vector<double>& saddles);

struct OccupationStats {
    std::vector<Region> regions;
    std::vector<double> visit_fraction;
    std::vector<std::vector<std::uint64_t>> dwell_times;  // in steps (records x thin)
    std::vector<std::vector<std::uint64_t>> transitions;  // [from][to]
    std::size_t samples = 0;
};

/// Throws OverlappingRegions.
OccupationStats occupation_measure(const TrajectoryRecord& tr, const std::vector<Region>& regions);

/// Region index per record, or -1 when unassigned.
std::vector<int> assign_regions(const TrajectoryRecord& tr, const std::vector<Region>& regions);

struct TransitionStats {
    std::vector<double> mean_dwell;
    std::vector<double> median_dwell;
    std::vector<std::uint64_t> gaps;  // steps between consecutive switches
    std::uint64_t switch_count = 0;
    double switches_per_million = 0.0;
};

TransitionStats transition_stats(const TrajectoryRecord& tr, const std::vector<Region>& regions);

/// weight_k proportional to (prod_j Lambda_j^k)^(-1/2). Throws
/// NonPositiveEigenvalue.
std::vector<double> hwang_weights(const std::vector<std::vector<double>>& eigenvalues);

/// Masses of exp(-V / temperature) on [lo, hi] split by the regions,
/// composite Simpson on n (even) intervals, normalized over [lo, hi].
std::vector<double> gibbs_quadrature_1d(const Landscape& V, double temperature, double lo, double hi, std::size_t n,
                                        const std::vector<Region>& regions);

struct PotentialEstimate {
    std::vector<double> centers;
    std::vector<std::optional<double>> values;  // empty for bins without counts
    std::vector<std::size_t> counts;
    std::vector<std::size_t> empty_bins;
};

/// V_hat = -a log(frequency) on `bins` equal bins of [lo, hi] using the
/// first x coordinate, shifted so that min V_hat = 0. This inverts the
/// Gibbs form of the isotropic single-scale model; it is not a rate
/// function in general.
PotentialEstimate potential_estimate(const TrajectoryRecord& tr, double lo, double hi, std::size_t bins, double a);

}  // namespace memlab
