#pragma once

// Shared domain types. These are value types: the simulation engine is
// the single writer, everything else sees immutable snapshots.

#include <cstdint>
#include <deque>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "psap/fixed_point.hpp"

namespace psap {

using ShardId = uint16_t;
using AccountId = uint64_t;
using BlockHeight = uint64_t;
using EpochId = uint64_t;
using ValidatorId = uint64_t;

inline constexpr ShardId kNoShard = 0xffff;

struct Validator {
    ValidatorId id = 0;
    FixedPoint stake;  // absolute stake units
    bool byzantine = false;
};

/// One entry of a shard's load history ring: executed count and gas.
struct LoadSample {
    uint64_t executed = 0;
    uint64_t gas = 0;
};

struct Transaction {
    AccountId src = 0;
    AccountId dst = 0;
    FixedPoint value;
    uint64_t gas = 0;
    BlockHeight arrival_block = 0;
};

struct ShardState {
    ShardId id = 0;
    uint64_t capacity = 0;    // transactions per block (C_s)
    uint64_t gas_limit = 0;   // gas units per block (G_block)
    std::deque<Transaction> queue;
    std::vector<Validator> validators;
    std::deque<LoadSample> load_history;  // bounded to the forecaster window

    FixedPoint total_stake() const {
        FixedPoint t;
        for (const auto& v : validators) t += v.stake;
        return t;
    }

    FixedPoint byzantine_stake() const {
        FixedPoint t;
        for (const auto& v : validators)
            if (v.byzantine) t += v.stake;
        return t;
    }

    /// Byzantine stake share; 0 for an empty committee.
    FixedPoint byzantine_fraction() const {
        FixedPoint total = total_stake();
        if (total == FixedPoint::zero()) return FixedPoint::zero();
        return byzantine_stake() / total;
    }
};

/// Account -> shard assignment plus the move-cooldown bookkeeping.
class AllocationMap {
public:
    AllocationMap() = default;
    AllocationMap(size_t accounts, ShardId shards)
        : mapping_(accounts, 0), last_moved_(accounts, kNeverMoved), shards_(shards) {}

    static constexpr BlockHeight kNeverMoved = ~BlockHeight{0};

    size_t size() const { return mapping_.size(); }
    ShardId shards() const { return shards_; }
    EpochId epoch() const { return epoch_; }
    void set_epoch(EpochId e) { epoch_ = e; }

    ShardId shard_of(AccountId a) const { return mapping_[a]; }
    BlockHeight last_moved(AccountId a) const { return last_moved_[a]; }

    void assign(AccountId a, ShardId s) { mapping_[a] = s; }

    void move(AccountId a, ShardId to, BlockHeight at) {
        mapping_[a] = to;
        last_moved_[a] = at;
    }

    bool on_cooldown(AccountId a, BlockHeight now, BlockHeight cooldown) const {
        BlockHeight lm = last_moved_[a];
        return lm != kNeverMoved && now < lm + cooldown;
    }

    std::vector<uint64_t> per_shard_counts() const {
        std::vector<uint64_t> c(shards_, 0);
        for (ShardId s : mapping_) ++c[s];
        return c;
    }

private:
    std::vector<ShardId> mapping_;
    std::vector<BlockHeight> last_moved_;
    ShardId shards_ = 0;
    EpochId epoch_ = 0;
};

/// Per-shard values at one height.
using LoadVector = std::vector<FixedPoint>;

inline bool is_cross_shard(const Transaction& tx, const AllocationMap& pi) {
    return pi.shard_of(tx.src) != pi.shard_of(tx.dst);
}

/// The static hash placement: splitmix64 finalizer of the account id
/// modulo K. Stable across the run, shared by the initial allocation,
/// the static baseline policy, and the trace generators.
inline ShardId static_assignment(AccountId a, ShardId shards) {
    uint64_t z = a + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return ShardId(z % shards);
}

}  // namespace psap
