#include "psap/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace psap::workload {

const char* to_string(TraceKind k) {
    switch (k) {
        case TraceKind::kPoisson: return "poisson";
        case TraceKind::kDiurnal: return "diurnal";
        case TraceKind::kHotspot: return "hotspot";
        case TraceKind::kStakeBribery: return "stake_bribery";
        case TraceKind::kAdaptive: return "adaptive";
        case TraceKind::kReplay: return "replay";
    }
    return "?";
}

TraceKind trace_kind_from_string(const std::string& s) {
    if (s == "poisson") return TraceKind::kPoisson;
    if (s == "diurnal") return TraceKind::kDiurnal;
    if (s == "hotspot") return TraceKind::kHotspot;
    if (s == "stake_bribery") return TraceKind::kStakeBribery;
    if (s == "adaptive") return TraceKind::kAdaptive;
    if (s == "replay") return TraceKind::kReplay;
    throw ConfigError("unknown trace kind: " + s);
}

void TraceSpec::validate() const {
    if (duration == 0) throw ConfigError("duration must be > 0");
    if (fraction < 0.0 || fraction > 1.0) throw ConfigError("fraction must be in [0,1]");
    if (amplitude < 0.0 || amplitude >= 1.0) throw ConfigError("amplitude must be in [0,1)");
    if (shards == 0) throw ConfigError("shards must be >= 1");
    if (accounts == 0) throw ConfigError("accounts must be >= 1");
    if (base_rate < 0.0) throw ConfigError("base_rate must be >= 0");
    if (blocks_per_hour == 0) throw ConfigError("blocks_per_hour must be >= 1");
    if (kind == TraceKind::kHotspot && target_shard >= shards && rotate_period == 0)
        throw ConfigError("target_shard out of range");
    if (kind == TraceKind::kReplay && replay_path.empty())
        throw ConfigError("replay kind requires replay_path");
    if (burst_multiplier < 0.0) throw ConfigError("burst_multiplier must be >= 0");
}

double hour_of_day(BlockHeight t, uint32_t blocks_per_hour) {
    uint64_t day = uint64_t(blocks_per_hour) * 24;
    return double(t % day) / double(blocks_per_hour);
}

LoadVector adaptive_adversary_step(const LoadVector& base, BlockHeight t,
                                   const LoadVector& prev_weights, double alpha,
                                   double omega) {
    LoadVector out = base;
    if (out.empty() || alpha == 0.0) return out;
    FixedPoint total;
    for (const auto& l : base) total += l;
    FixedPoint mean = total / FixedPoint::from_int(int64_t(base.size()));

    size_t hi = 0, lo = 0;
    for (size_t s = 1; s < prev_weights.size() && s < base.size(); ++s) {
        if (prev_weights[s] > prev_weights[hi]) hi = s;
        if (prev_weights[s] < prev_weights[lo]) lo = s;
    }
    if (hi == lo) return out;

    double shift = alpha * std::sin(2.0 * M_PI * omega * double(t));
    FixedPoint delta = FixedPoint::from_double(shift) * mean;
    if (delta == FixedPoint::zero()) return out;

    // delta > 0 drains the low-weight shard into the high-weight shard;
    // a negative sine flips the direction. Clamp to keep entries >= 0.
    size_t to = delta > FixedPoint::zero() ? hi : lo;
    size_t from = delta > FixedPoint::zero() ? lo : hi;
    FixedPoint mag = min(delta.abs(), out[from]);
    out[from] -= mag;
    out[to] += mag;
    return out;
}

namespace {

// Weighted alias-free sampling: prefix sums + binary search.
class WeightedPicker {
public:
    void build(const std::vector<double>& weights) {
        prefix_.resize(weights.size());
        double acc = 0;
        for (size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            prefix_[i] = acc;
        }
        total_ = acc;
    }

    bool empty() const { return prefix_.empty() || total_ <= 0.0; }

    size_t pick(DeterministicRng& rng) const {
        double u = rng.uniform01() * total_;
        auto it = std::lower_bound(prefix_.begin(), prefix_.end(), u);
        if (it == prefix_.end()) return prefix_.size() - 1;
        return size_t(it - prefix_.begin());
    }

private:
    std::vector<double> prefix_;
    double total_ = 0;
};

class GeneratedSource final : public TraceSource {
public:
    explicit GeneratedSource(const TraceSpec& spec) : spec_(spec) {
        spec_.validate();
        Sha256 h;
        h.update(std::string("psap/trace/v1"));
        h.update_u64(spec_.seed);
        base_digest_ = h.finish();

        // Account base weights: lognormal activity profile, fixed per run.
        DeterministicRng wrng(base_digest_, 0, "account-weights");
        weights_.resize(spec_.accounts);
        group_.resize(spec_.accounts);
        group_members_.assign(spec_.shards, {});
        for (uint32_t a = 0; a < spec_.accounts; ++a) {
            weights_[a] = std::exp(wrng.gaussian(0.0, 1.0));
            group_[a] = static_assignment(a, spec_.shards);
            group_members_[group_[a]].push_back(a);
        }
        group_pickers_.resize(spec_.shards);
        std::vector<double> gw;
        for (ShardId g = 0; g < spec_.shards; ++g) {
            gw.clear();
            for (AccountId a : group_members_[g]) gw.push_back(weights_[a]);
            group_pickers_[g].build(gw);
        }
        global_picker_.build(weights_);
        if (spec_.kind == TraceKind::kHotspot && spec_.rotate_period == 0)
            refresh_hot_set(spec_.target_shard, 0);
    }

    uint32_t account_count() const override { return spec_.accounts; }
    const TraceSpec& spec() const override { return spec_; }

    std::vector<Transaction> next_block(BlockHeight t, const EngineFeedback* fb) override {
        DeterministicRng rng(base_digest_, t, "arrivals");
        std::vector<Transaction> txs;

        bool in_window = attack_active(t);
        if (spec_.kind == TraceKind::kHotspot && spec_.rotate_period > 0) {
            uint64_t event = t / spec_.rotate_period;
            if (event != hot_event_) {
                DeterministicRng rot(base_digest_, event, "rotate");
                refresh_hot_set(ShardId(rot.uniform(spec_.shards)), event);
            }
        }

        // Per-group base rates for this block.
        std::vector<double> rate(spec_.shards);
        double total_rate = 0;
        for (ShardId g = 0; g < spec_.shards; ++g) {
            rate[g] = spec_.base_rate * diurnal_factor(t, g);
            if (spec_.kind == TraceKind::kPoisson && in_window)
                rate[g] *= spec_.burst_multiplier;
            total_rate += rate[g];
        }

        if (spec_.kind == TraceKind::kAdaptive && fb != nullptr &&
            !fb->allocation_weights.empty()) {
            LoadVector base;
            for (double r : rate) base.push_back(FixedPoint::from_double(r));
            LoadVector perturbed = adaptive_adversary_step(
                base, t, fb->allocation_weights, spec_.amplitude, spec_.frequency);
            // Adaptive load lands on the shard's *current* residents.
            return sample_by_current_shard(t, perturbed, fb, rng);
        }

        for (ShardId g = 0; g < spec_.shards; ++g) {
            uint64_t n = rng.poisson(rate[g]);
            for (uint64_t i = 0; i < n; ++i)
                txs.push_back(make_tx(t, pick_src(g, rng), rng));
        }

        // Hot-spot overlay: `fraction` of all arrivals sourced from the
        // frozen hot set, so the targeted shard receives that share until
        // migrations spread the hot accounts.
        bool hot = spec_.kind == TraceKind::kHotspot && in_window && spec_.fraction > 0;
        if (hot && !hot_set_.empty()) {
            double hot_rate = total_rate * spec_.fraction / (1.0 - spec_.fraction);
            uint64_t n = rng.poisson(hot_rate);
            for (uint64_t i = 0; i < n; ++i) {
                AccountId src = hot_set_[hot_picker_.pick(rng)];
                txs.push_back(make_tx(t, src, rng));
            }
        }
        return txs;
    }

private:
    // attack_stop == 0 means the window spans the whole run.
    bool attack_active(BlockHeight t) const {
        if (spec_.attack_stop == 0) return t >= spec_.attack_start;
        return t >= spec_.attack_start && t < spec_.attack_stop;
    }

    double diurnal_factor(BlockHeight t, ShardId g) const {
        bool diurnal = spec_.kind == TraceKind::kDiurnal ||
                       spec_.kind == TraceKind::kHotspot ||
                       spec_.kind == TraceKind::kStakeBribery;
        if (!diurnal || spec_.diurnal_amplitude <= 0.0) return 1.0;
        double hour = hour_of_day(t, spec_.blocks_per_hour);
        double phase = 2.0 * M_PI * double(g) / double(spec_.shards);
        return 1.0 + spec_.diurnal_amplitude * std::sin(2.0 * M_PI * hour / 24.0 + phase);
    }

    void refresh_hot_set(ShardId target, uint64_t event) {
        hot_event_ = event;
        hot_target_ = target;
        hot_set_.clear();
        if (spec_.kind != TraceKind::kHotspot) return;
        // Highest-weight members of the target group form the hot set.
        std::vector<AccountId> members = group_members_[target];
        std::sort(members.begin(), members.end(), [&](AccountId a, AccountId b) {
            if (weights_[a] != weights_[b]) return weights_[a] > weights_[b];
            return a < b;
        });
        size_t n = std::min<size_t>(spec_.hot_accounts, members.size());
        hot_set_.assign(members.begin(), members.begin() + n);
        std::vector<double> hw;
        for (AccountId a : hot_set_) hw.push_back(weights_[a]);
        hot_picker_.build(hw);
    }

    AccountId pick_src(ShardId g, DeterministicRng& rng) const {
        if (group_members_[g].empty()) return AccountId(global_picker_.pick(rng));
        return group_members_[g][group_pickers_[g].pick(rng)];
    }

    Transaction make_tx(BlockHeight t, AccountId src, DeterministicRng& rng) const {
        Transaction tx;
        tx.src = src;
        if (rng.uniform01() < spec_.locality) {
            ShardId g = group_[src];
            tx.dst = group_members_[g][group_pickers_[g].pick(rng)];
        } else {
            tx.dst = AccountId(global_picker_.pick(rng));
        }
        tx.gas = 21000 + 1000 * rng.uniform(30);
        tx.value = FixedPoint::from_int(int64_t(1 + rng.uniform(100)));
        tx.arrival_block = t;
        return tx;
    }

    std::vector<Transaction> sample_by_current_shard(BlockHeight t,
                                                     const LoadVector& rates,
                                                     const EngineFeedback* fb,
                                                     DeterministicRng& rng) {
        std::vector<std::vector<AccountId>> residents(spec_.shards);
        const AllocationMap& pi = *fb->allocation;
        for (AccountId a = 0; a < pi.size(); ++a)
            if (pi.shard_of(a) < spec_.shards) residents[pi.shard_of(a)].push_back(a);
        std::vector<Transaction> txs;
        for (ShardId s = 0; s < spec_.shards && s < rates.size(); ++s) {
            if (residents[s].empty()) continue;
            uint64_t n = rng.poisson(rates[s].to_double());
            for (uint64_t i = 0; i < n; ++i) {
                AccountId src = residents[s][rng.uniform(residents[s].size())];
                txs.push_back(make_tx(t, src, rng));
            }
        }
        return txs;
    }

    TraceSpec spec_;
    Digest base_digest_;
    std::vector<double> weights_;
    std::vector<ShardId> group_;
    std::vector<std::vector<AccountId>> group_members_;
    std::vector<WeightedPicker> group_pickers_;
    WeightedPicker global_picker_;
    std::vector<AccountId> hot_set_;
    WeightedPicker hot_picker_;
    uint64_t hot_event_ = ~uint64_t{0};
    ShardId hot_target_ = 0;
};

class ReplaySource final : public TraceSource {
public:
    explicit ReplaySource(const TraceSpec& spec)
        : spec_(spec), blocks_(ingest_csv(spec.replay_path)) {
        uint64_t max_account = 0;
        for (const auto& blk : blocks_)
            for (const auto& tx : blk)
                max_account = std::max({max_account, tx.src, tx.dst});
        accounts_ = uint32_t(max_account + 1);
    }

    std::vector<Transaction> next_block(BlockHeight t, const EngineFeedback*) override {
        if (t >= blocks_.size()) return {};
        return blocks_[t];
    }

    uint32_t account_count() const override { return accounts_; }
    const TraceSpec& spec() const override { return spec_; }

private:
    TraceSpec spec_;
    std::vector<std::vector<Transaction>> blocks_;
    uint32_t accounts_ = 1;
};

}  // namespace

std::unique_ptr<TraceSource> make_source(const TraceSpec& spec) {
    spec.validate();
    if (spec.kind == TraceKind::kReplay) return std::make_unique<ReplaySource>(spec);
    return std::make_unique<GeneratedSource>(spec);
}

std::vector<std::vector<Transaction>> materialize(const TraceSpec& spec) {
    auto src = make_source(spec);
    std::vector<std::vector<Transaction>> out;
    out.reserve(spec.duration);
    for (BlockHeight t = 0; t < spec.duration; ++t) out.push_back(src->next_block(t, nullptr));
    return out;
}

TraceMatrix build_trace_matrix(const TraceSpec& spec) {
    auto src = make_source(spec);
    TraceMatrix m;
    m.shards = spec.shards;
    m.blocks_per_hour = spec.blocks_per_hour;
    m.counts.assign(spec.duration, std::vector<uint32_t>(spec.shards, 0));
    m.gas.assign(spec.duration, 0);
    for (BlockHeight t = 0; t < spec.duration; ++t) {
        for (const auto& tx : src->next_block(t, nullptr)) {
            ++m.counts[t][static_assignment(tx.src, spec.shards)];
            m.gas[t] += tx.gas;
        }
    }
    return m;
}

// ---- UTXO clustering -----------------------------------------------------

namespace {

class UnionFind {
public:
    explicit UnionFind(size_t n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), size_t{0});
    }

    size_t find(size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(size_t a, size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
    }

private:
    std::vector<size_t> parent_;
    std::vector<size_t> rank_;
};

}  // namespace

std::optional<size_t> UtxoClustering::cluster_of(const std::string& addr) const {
    auto it = index.find(addr);
    if (it == index.end()) return std::nullopt;
    return it->second;
}

UtxoClustering cluster_utxo(const std::vector<UtxoRecord>& records) {
    UtxoClustering out;

    std::unordered_map<std::string, size_t> addr_ix;
    std::vector<std::string> addrs;
    auto intern = [&](const std::string& a) {
        auto [it, fresh] = addr_ix.emplace(a, addrs.size());
        if (fresh) addrs.push_back(a);
        return it->second;
    };

    std::vector<const UtxoRecord*> good;
    for (const auto& r : records) {
        if (r.inputs.empty() || r.outputs.empty()) {
            ++out.skipped_records;
            continue;
        }
        good.push_back(&r);
        for (const auto& a : r.inputs) intern(a);
        for (const auto& a : r.outputs) intern(a);
    }

    UnionFind uf(addrs.size());
    for (const auto* r : good) {
        size_t first = addr_ix[r->inputs[0]];
        for (const auto& a : r->inputs) uf.unite(first, addr_ix[a]);
    }

    // Canonical cluster key: lexicographically smallest member address,
    // so the partition identity is independent of record order.
    std::map<std::string, std::vector<std::string>> clusters;
    std::vector<std::string> root_key(addrs.size());
    {
        std::unordered_map<size_t, std::string> best;
        for (size_t i = 0; i < addrs.size(); ++i) {
            size_t r = uf.find(i);
            auto it = best.find(r);
            if (it == best.end() || addrs[i] < it->second) best[r] = addrs[i];
        }
        for (size_t i = 0; i < addrs.size(); ++i) root_key[i] = best[uf.find(i)];
        for (size_t i = 0; i < addrs.size(); ++i) clusters[root_key[i]].push_back(addrs[i]);
    }

    std::unordered_map<std::string, size_t> key_to_ix;
    for (auto& [key, members] : clusters) {
        std::sort(members.begin(), members.end());
        PseudoAccount pa;
        pa.cluster_key = key;
        pa.members = members;
        key_to_ix[key] = out.accounts.size();
        out.accounts.push_back(std::move(pa));
    }
    for (size_t i = 0; i < addrs.size(); ++i) out.index[addrs[i]] = key_to_ix[root_key[i]];

    // Activity + cross-cluster pseudo transfers.
    BlockHeight lo = ~BlockHeight{0}, hi = 0;
    std::vector<uint64_t> touches(out.accounts.size(), 0);
    for (const auto* r : good) {
        lo = std::min(lo, r->block);
        hi = std::max(hi, r->block);
        size_t src = out.index[r->inputs[0]];
        ++touches[src];
        for (const auto& a : r->outputs) {
            size_t dst = out.index[a];
            if (dst == src) continue;
            Transaction tx;
            tx.src = AccountId(src);
            tx.dst = AccountId(dst);
            tx.gas = 21000;
            tx.value = FixedPoint::one();
            tx.arrival_block = r->block;
            out.pseudo_stream.push_back(tx);
        }
    }
    double span = good.empty() ? 1.0 : double(hi - lo + 1);
    for (size_t i = 0; i < out.accounts.size(); ++i)
        out.accounts[i].activity_rate = double(touches[i]) / span;
    return out;
}

// ---- CSV ----------------------------------------------------------------

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

uint64_t parse_u64(const std::string& s, const char* what, size_t line_no) {
    try {
        size_t pos = 0;
        uint64_t v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
    }
}

}  // namespace

std::vector<UtxoRecord> read_utxo_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty file " + path);
    if (split(line, ',') != std::vector<std::string>{"txid", "inputs", "outputs", "block"})
        throw ConfigError("line 1: expected header txid,inputs,outputs,block");
    std::vector<UtxoRecord> out;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cols = split(line, ',');
        if (cols.size() != 4)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 4 columns");
        UtxoRecord r;
        r.txid = cols[0];
        for (auto& a : split(cols[1], '|'))
            if (!a.empty()) r.inputs.push_back(a);
        for (auto& a : split(cols[2], '|'))
            if (!a.empty()) r.outputs.push_back(a);
        r.block = parse_u64(cols[3], "block", line_no);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<std::vector<Transaction>> ingest_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty file " + path);
    if (split(line, ',') != std::vector<std::string>{"block", "src", "dst", "value", "gas"})
        throw ConfigError("line 1: expected header block,src,dst,value,gas");

    std::vector<std::vector<Transaction>> blocks;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cols = split(line, ',');
        if (cols.size() != 5)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 5 columns");
        Transaction tx;
        BlockHeight b = parse_u64(cols[0], "block", line_no);
        tx.src = parse_u64(cols[1], "src", line_no);
        tx.dst = parse_u64(cols[2], "dst", line_no);
        tx.value = FixedPoint::from_raw(
            int64_t(parse_u64(cols[3], "value", line_no)));
        tx.gas = parse_u64(cols[4], "gas", line_no);
        tx.arrival_block = b;
        if (blocks.size() <= b) blocks.resize(b + 1);
        blocks[b].push_back(tx);
    }
    return blocks;
}

void export_csv(const std::string& path,
                const std::vector<std::vector<Transaction>>& blocks) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << "block,src,dst,value,gas\n";
    for (size_t b = 0; b < blocks.size(); ++b)
        for (const auto& tx : blocks[b])
            out << b << ',' << tx.src << ',' << tx.dst << ',' << uint64_t(tx.value.raw())
                << ',' << tx.gas << '\n';
    if (!out) throw ConfigError("write failed for " + path);
}

}  // namespace psap::workload
