#include "psap/metrics.hpp"

#include <stdexcept>

namespace psap {

FixedPoint imbalance(const LoadVector& utils) {
    if (utils.empty()) throw std::invalid_argument("empty shard set");
    FixedPoint lo = utils[0];
    FixedPoint hi = utils[0];
    for (const auto& u : utils) {
        lo = min(lo, u);
        hi = max(hi, u);
    }
    return hi - lo;
}

FixedPoint imbalance_index(const LoadVector& loads) {
    if (loads.empty()) throw std::invalid_argument("zero mean load");
    FixedPoint sum;
    for (const auto& l : loads) sum += l;
    FixedPoint mean = sum / FixedPoint::from_int(int64_t(loads.size()));
    if (mean == FixedPoint::zero()) throw std::invalid_argument("zero mean load");
    FixedPoint acc;
    for (const auto& l : loads) acc += ((l - mean) / mean).abs();
    return acc / FixedPoint::from_int(int64_t(loads.size()));
}

CrossShardRatio cross_shard_ratio(std::span<const Transaction> txs,
                                  const AllocationMap& pi) {
    CrossShardRatio r;
    if (txs.empty()) return r;
    uint64_t cross_count = 0;
    uint64_t cross_gas = 0;
    uint64_t total_gas = 0;
    for (const auto& tx : txs) {
        total_gas += tx.gas;
        if (is_cross_shard(tx, pi)) {
            ++cross_count;
            cross_gas += tx.gas;
        }
    }
    r.count_ratio = FixedPoint::ratio(int64_t(cross_count), int64_t(txs.size()));
    r.gas_ratio = total_gas == 0
                      ? FixedPoint::zero()
                      : FixedPoint::ratio(int64_t(cross_gas), int64_t(total_gas));
    return r;
}

FixedPoint utilization(uint64_t executed, uint64_t capacity) {
    if (capacity == 0) throw std::invalid_argument("zero shard capacity");
    return FixedPoint::ratio(int64_t(executed), int64_t(capacity));
}

}  // namespace psap
