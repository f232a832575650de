#pragma once

// Block-level metric formulas shared by the engine, the gate and the
// report layer. All of them are pure functions over fixed-point inputs.

#include <span>

#include "psap/types.hpp"

namespace psap {

/// max - min of per-shard utilizations (the headline imbalance metric).
/// Throws std::invalid_argument("empty shard set") on an empty vector.
FixedPoint imbalance(const LoadVector& utils);

/// Mean absolute relative deviation from the mean load:
/// I = (1/K) * sum |L_k - Lbar| / Lbar.
/// Throws std::invalid_argument("zero mean load") when the mean is 0.
FixedPoint imbalance_index(const LoadVector& loads);

struct CrossShardRatio {
    FixedPoint count_ratio;  // rho: cross-shard tx count / total count
    FixedPoint gas_ratio;    // phi: cross-shard gas / total gas
};

/// Both ratios for one block's executed transactions under pi.
/// Zero on an empty block.
CrossShardRatio cross_shard_ratio(std::span<const Transaction> txs,
                                  const AllocationMap& pi);

/// x_s / C_s with fixed-point rounding; throws on zero capacity.
FixedPoint utilization(uint64_t executed, uint64_t capacity);

}  // namespace psap
