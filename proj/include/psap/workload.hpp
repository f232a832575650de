#pragma once

// Transaction trace generation and ingestion: synthetic diurnal/Poisson
// loads, the hot-spot and stake-bribery attack overlays, the adaptive
// oscillating adversary, UTXO-to-pseudo-account mapping, and CSV replay.
//
// Generated streams are pure functions of (spec, seed) and never look at
// live engine state, so paired policy runs replay identical arrivals.
// The adaptive adversary is the one exception: it reads the previous
// block's allocation weights through the feedback hook.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "psap/rng.hpp"
#include "psap/types.hpp"

namespace psap::workload {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class TraceKind { kPoisson, kDiurnal, kHotspot, kStakeBribery, kAdaptive, kReplay };

const char* to_string(TraceKind k);
TraceKind trace_kind_from_string(const std::string& s);

struct TraceSpec {
    TraceKind kind = TraceKind::kPoisson;
    double base_rate = 100.0;     // tx per block per shard
    uint64_t duration = 1000;     // blocks
    uint64_t seed = 1;
    uint16_t shards = 8;          // K, defines the initial account grouping
    uint32_t accounts = 4000;
    double locality = 0.7;        // P(dst stays in src's initial group)
    double diurnal_amplitude = 0.4;
    uint32_t blocks_per_hour = 20;

    // attack params
    double fraction = 0.0;         // hot-spot traffic share
    ShardId target_shard = 0;
    uint64_t attack_start = 0;
    uint64_t attack_stop = 0;      // exclusive; 0 = never
    double amplitude = 0.35;       // adaptive oscillation amplitude (alpha)
    double frequency = 0.01;       // adaptive cycles per block (omega)
    uint32_t hot_accounts = 64;    // hot set size per hot-spot event
    uint64_t rotate_period = 0;    // re-target the hot spot every N blocks (0 = fixed)
    double burst_multiplier = 1.0; // rate factor inside [attack_start, attack_stop)
    double bribery_rate = 0.0;     // honest->byzantine conversion per block (engine-side)
    std::string replay_path;

    void validate() const;
};

/// Hour of day in [0, 24) as a continuous value.
double hour_of_day(BlockHeight t, uint32_t blocks_per_hour);

/// Engine state visible to feedback-aware sources.
struct EngineFeedback {
    const AllocationMap* allocation = nullptr;
    LoadVector allocation_weights;  // per-shard account share after t-1
};

class TraceSource {
public:
    virtual ~TraceSource() = default;
    virtual std::vector<Transaction> next_block(BlockHeight t,
                                                const EngineFeedback* fb) = 0;
    virtual uint32_t account_count() const = 0;
    virtual const TraceSpec& spec() const = 0;
};

std::unique_ptr<TraceSource> make_source(const TraceSpec& spec);

/// One oscillation step of the adaptive adversary: returns the perturbed
/// per-shard load with a zero-sum shift of alpha*sin(2*pi*omega*t)*mean(L0)
/// from the lowest-weight shard toward the highest-weight shard (direction
/// flips with the sign of the sine). The shift magnitude is clamped so no
/// entry goes negative, keeping the total load exactly conserved.
LoadVector adaptive_adversary_step(const LoadVector& base, BlockHeight t,
                                   const LoadVector& prev_weights, double alpha,
                                   double omega);

// ---- UTXO trace mapping ----------------------------------------------

struct UtxoRecord {
    std::string txid;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    BlockHeight block = 0;
};

struct PseudoAccount {
    std::string cluster_key;             // lexicographically smallest member
    std::vector<std::string> members;    // sorted
    double activity_rate = 0.0;          // records touching the cluster per block
};

struct UtxoClustering {
    std::vector<PseudoAccount> accounts;      // sorted by cluster_key
    std::vector<Transaction> pseudo_stream;   // cross-cluster transfers
    uint64_t skipped_records = 0;             // malformed, counted not fatal
    /// Index into `accounts` for an address, if seen.
    std::optional<size_t> cluster_of(const std::string& addr) const;

    // internal: address -> accounts index
    std::unordered_map<std::string, size_t> index;
};

/// Multi-input heuristic: union addresses that co-spend in one record,
/// emit cross-cluster transfers as pseudo transactions. Records must be
/// sorted by block height.
UtxoClustering cluster_utxo(const std::vector<UtxoRecord>& records);

/// Parse the UTXO CSV format: txid,inputs,outputs,block with pipe-separated
/// address lists. Throws ConfigError with a line number on bad structure.
std::vector<UtxoRecord> read_utxo_csv(const std::string& path);

// ---- flat trace CSV ----------------------------------------------------

/// CSV columns: block,src,dst,value,gas (header required). Throws
/// ConfigError naming the offending line on malformed input.
std::vector<std::vector<Transaction>> ingest_csv(const std::string& path);

void export_csv(const std::string& path,
                const std::vector<std::vector<Transaction>>& blocks);

/// Materialize a generated trace as per-block batches (testing and export).
std::vector<std::vector<Transaction>> materialize(const TraceSpec& spec);

// ---- offline aggregation for forecaster training ------------------------

/// Per-block per-shard arrival counts plus total gas, tallied under the
/// static initial assignment. This is the forecaster's offline training
/// view of a trace (arrivals approximate executed counts below capacity).
struct TraceMatrix {
    uint16_t shards = 0;
    uint32_t blocks_per_hour = 20;
    std::vector<std::vector<uint32_t>> counts;  // [block][shard]
    std::vector<uint64_t> gas;                  // [block]
};

TraceMatrix build_trace_matrix(const TraceSpec& spec);

}  // namespace psap::workload
