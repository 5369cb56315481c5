// Copyright (c) 2026, memlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// Seeded random streams. Every sampling routine in the library documents how
// many raw draws it takes from a Stream, so a run is reproducible bit for bit
// from its seed, and parallel workers get disjoint sub-streams via
// derive_seed(root, id).

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace memlab {

/// SplitMix64-mixed child seed for sub-stream `id` of `root`.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t id);

class Stream {
public:
    explicit Stream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    /// Sub-stream `id` derived from this stream's seed; does not consume draws.
    Stream substream(std::uint64_t id) const { return Stream(derive_seed(seed_, id)); }

    std::uint64_t seed() const noexcept { return seed_; }

    /// One raw 64-bit draw.
    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 bits; one draw.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal by Box-Muller (cosine branch only); two draws.
    double normal();

    /// Fair +1/-1; one draw.
    double rademacher() { return (engine_() >> 63) != 0 ? 1.0 : -1.0; }

    /// Index drawn from nonnegative weights summing to ~1 by inverse CDF; one
    /// draw. Never returns an index of zero weight.
    std::size_t categorical(std::span<const double> weights);

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

}  // namespace memlab
