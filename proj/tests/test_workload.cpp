#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "psap/workload.hpp"

using namespace psap;
using namespace psap::workload;

namespace {

TraceSpec small_poisson() {
    TraceSpec s;
    s.kind = TraceKind::kPoisson;
    s.base_rate = 100;
    s.duration = 10;
    s.seed = 77;
    s.shards = 4;
    s.accounts = 400;
    s.diurnal_amplitude = 0.0;
    return s;
}

bool streams_equal(const std::vector<std::vector<Transaction>>& a,
                   const std::vector<std::vector<Transaction>>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != b[i].size()) return false;
        for (size_t j = 0; j < a[i].size(); ++j) {
            const auto& x = a[i][j];
            const auto& y = b[i][j];
            if (x.src != y.src || x.dst != y.dst || x.gas != y.gas ||
                x.value != y.value || x.arrival_block != y.arrival_block)
                return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("generator determinism: equal (spec, seed) -> equal streams") {
    auto a = materialize(small_poisson());
    auto b = materialize(small_poisson());
    CHECK(streams_equal(a, b));

    TraceSpec other = small_poisson();
    other.seed = 78;
    CHECK_FALSE(streams_equal(a, materialize(other)));
}

TEST_CASE("spec validation") {
    TraceSpec s = small_poisson();
    s.fraction = 1.5;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = small_poisson();
    s.duration = 0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = small_poisson();
    s.amplitude = 1.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = small_poisson();
    s.kind = TraceKind::kReplay;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    CHECK_THROWS_AS(trace_kind_from_string("bogus"), ConfigError);
}

TEST_CASE("hotspot: target shard receives the configured share of arrivals") {
    TraceSpec s;
    s.kind = TraceKind::kHotspot;
    s.base_rate = 120;
    s.duration = 300;
    s.seed = 5;
    s.shards = 8;
    s.accounts = 4000;
    s.diurnal_amplitude = 0.0;
    s.fraction = 0.35;
    s.target_shard = 3;
    s.attack_start = 0;
    s.attack_stop = 0;  // whole run

    auto blocks = materialize(s);
    uint64_t total = 0, to_target = 0;
    for (const auto& blk : blocks)
        for (const auto& tx : blk) {
            ++total;
            if (static_assignment(tx.src, s.shards) == 3) ++to_target;
        }
    // hot share f plus the target group's organic 1/K share of the rest
    double expect = 0.35 + 0.65 / 8.0;
    double got = double(to_target) / double(total);
    CHECK(got == doctest::Approx(expect).epsilon(0.05));
}

TEST_CASE("poisson burst window lifts the rate by the multiplier") {
    TraceSpec s = small_poisson();
    s.duration = 600;
    s.base_rate = 50;
    s.burst_multiplier = 5.0;
    s.attack_start = 200;
    s.attack_stop = 400;

    auto blocks = materialize(s);
    double in_window = 0, outside = 0;
    for (size_t t = 0; t < blocks.size(); ++t) {
        if (t >= 200 && t < 400)
            in_window += double(blocks[t].size());
        else
            outside += double(blocks[t].size());
    }
    double ratio = (in_window / 200.0) / (outside / 400.0);
    CHECK(ratio == doctest::Approx(5.0).epsilon(0.05));
}

TEST_CASE("adaptive adversary step") {
    LoadVector base{FixedPoint::from_int(100), FixedPoint::from_int(100),
                    FixedPoint::from_int(100), FixedPoint::from_int(100)};
    LoadVector w{FixedPoint::from_double(0.4), FixedPoint::from_double(0.2),
                 FixedPoint::from_double(0.25), FixedPoint::from_double(0.15)};

    SUBCASE("zero sine keeps the base load") {
        // omega = 0.01 -> sin(2*pi*0.01*t) = 0 at t = 0, 50, 100...
        auto out = adaptive_adversary_step(base, 0, w, 0.35, 0.01);
        for (size_t s = 0; s < 4; ++s) CHECK(out[s] == base[s]);
        out = adaptive_adversary_step(base, 50, w, 0.35, 0.01);
        for (size_t s = 0; s < 4; ++s)
            CHECK(std::abs(out[s].to_double() - 100.0) < 0.01);
    }

    SUBCASE("alpha = 0 is the identity") {
        auto out = adaptive_adversary_step(base, 17, w, 0.0, 0.01);
        for (size_t s = 0; s < 4; ++s) CHECK(out[s] == base[s]);
    }

    SUBCASE("peak sine routes 35% of the mean toward the heaviest shard") {
        // t = 25 with omega = 0.01 -> sin = 1
        auto out = adaptive_adversary_step(base, 25, w, 0.35, 0.01);
        CHECK(out[0].to_double() == doctest::Approx(135.0).epsilon(1e-3));
        CHECK(out[3].to_double() == doctest::Approx(65.0).epsilon(1e-3));
        CHECK(out[1].to_double() == doctest::Approx(100.0));
    }

    SUBCASE("total load is conserved exactly") {
        for (BlockHeight t : {3, 13, 25, 42, 75, 99}) {
            auto out = adaptive_adversary_step(base, t, w, 0.35, 0.01);
            FixedPoint a, b;
            for (size_t s = 0; s < 4; ++s) {
                a += base[s];
                b += out[s];
            }
            CHECK(a == b);
        }
    }
}

// ---- UTXO clustering ------------------------------------------------------

namespace {

// Independent oracle: BFS connected components on the co-spend graph.
std::set<std::set<std::string>> bfs_partition(const std::vector<UtxoRecord>& records) {
    std::map<std::string, std::set<std::string>> adj;
    std::set<std::string> all;
    for (const auto& r : records) {
        if (r.inputs.empty() || r.outputs.empty()) continue;
        for (const auto& a : r.inputs) all.insert(a);
        for (const auto& a : r.outputs) all.insert(a);
        for (size_t i = 1; i < r.inputs.size(); ++i) {
            adj[r.inputs[0]].insert(r.inputs[i]);
            adj[r.inputs[i]].insert(r.inputs[0]);
        }
    }
    std::set<std::set<std::string>> parts;
    std::set<std::string> seen;
    for (const auto& start : all) {
        if (seen.count(start)) continue;
        std::set<std::string> comp;
        std::vector<std::string> stack{start};
        while (!stack.empty()) {
            std::string cur = stack.back();
            stack.pop_back();
            if (!comp.insert(cur).second) continue;
            seen.insert(cur);
            for (const auto& nxt : adj[cur])
                if (!comp.count(nxt)) stack.push_back(nxt);
        }
        parts.insert(comp);
    }
    return parts;
}

std::set<std::set<std::string>> clustering_partition(const UtxoClustering& c) {
    std::set<std::set<std::string>> parts;
    for (const auto& pa : c.accounts)
        parts.insert(std::set<std::string>(pa.members.begin(), pa.members.end()));
    return parts;
}

std::vector<UtxoRecord> synthetic_utxo(size_t n, uint64_t seed) {
    DeterministicRng rng(seed);
    std::vector<UtxoRecord> records;
    const size_t universe = n / 2 + 10;
    for (size_t i = 0; i < n; ++i) {
        UtxoRecord r;
        r.txid = "tx" + std::to_string(i);
        r.block = i / 8;
        size_t nin = 1 + rng.uniform(3);
        size_t nout = 1 + rng.uniform(2);
        for (size_t k = 0; k < nin; ++k)
            r.inputs.push_back("a" + std::to_string(rng.uniform(universe)));
        for (size_t k = 0; k < nout; ++k)
            r.outputs.push_back("a" + std::to_string(rng.uniform(universe)));
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace

TEST_CASE("co-spend transitivity") {
    std::vector<UtxoRecord> rs;
    rs.push_back({"t1", {"a", "b"}, {"x"}, 0});
    rs.push_back({"t2", {"b", "c"}, {"y"}, 1});
    auto c = cluster_utxo(rs);
    auto abc = c.cluster_of("a");
    REQUIRE(abc.has_value());
    CHECK(c.cluster_of("b") == abc);
    CHECK(c.cluster_of("c") == abc);
    CHECK(c.accounts[*abc].members == std::vector<std::string>{"a", "b", "c"});

    // disjoint inputs stay in separate clusters
    std::vector<UtxoRecord> rs2;
    rs2.push_back({"t1", {"a"}, {"x"}, 0});
    rs2.push_back({"t2", {"b"}, {"y"}, 1});
    auto c2 = cluster_utxo(rs2);
    CHECK(c2.cluster_of("a") != c2.cluster_of("b"));
}

TEST_CASE("malformed records are skipped and counted") {
    std::vector<UtxoRecord> rs;
    rs.push_back({"t1", {"a", "b"}, {"x"}, 0});
    rs.push_back({"bad", {}, {"y"}, 1});
    rs.push_back({"bad2", {"z"}, {}, 2});
    auto c = cluster_utxo(rs);
    CHECK(c.skipped_records == 2);
    CHECK_FALSE(c.cluster_of("y").has_value());
}

TEST_CASE("clustering equals BFS connected-components oracle on 1000 records") {
    auto records = synthetic_utxo(1000, 99);
    auto c = cluster_utxo(records);
    CHECK(clustering_partition(c) == bfs_partition(records));
}

TEST_CASE("clustering is order-insensitive within a block") {
    auto records = synthetic_utxo(200, 4);
    for (auto& r : records) r.block = r.block / 4;  // widen blocks
    auto base = clustering_partition(cluster_utxo(records));

    DeterministicRng rng(11);
    // permute records within equal-block runs
    for (int trial = 0; trial < 5; ++trial) {
        auto shuffled = records;
        size_t i = 0;
        while (i < shuffled.size()) {
            size_t j = i;
            while (j < shuffled.size() && shuffled[j].block == shuffled[i].block) ++j;
            for (size_t k = j - i; k > 1; --k)
                std::swap(shuffled[i + k - 1], shuffled[i + rng.uniform(k)]);
            i = j;
        }
        CHECK(clustering_partition(cluster_utxo(shuffled)) == base);
    }
}

// ---- CSV ------------------------------------------------------------------

TEST_CASE("csv ingest and round trip") {
    std::string path = "workload_test_trace.csv";

    SUBCASE("empty after header") {
        std::ofstream(path) << "block,src,dst,value,gas\n";
        auto blocks = ingest_csv(path);
        CHECK(blocks.empty());
    }

    SUBCASE("three rows in order") {
        std::ofstream(path) << "block,src,dst,value,gas\n"
                            << "0,1,2,65536,21000\n"
                            << "0,3,4,131072,22000\n"
                            << "2,5,6,65536,23000\n";
        auto blocks = ingest_csv(path);
        REQUIRE(blocks.size() == 3);
        CHECK(blocks[0].size() == 2);
        CHECK(blocks[1].empty());
        CHECK(blocks[2].size() == 1);
        CHECK(blocks[2][0].src == 5);
        CHECK(blocks[2][0].gas == 23000);
    }

    SUBCASE("bad rows name the line") {
        std::ofstream(path) << "block,src,dst,value,gas\n0,1,2,65536\n";
        CHECK_THROWS_WITH_AS(ingest_csv(path), "line 2: expected 5 columns", ConfigError);
        std::ofstream(path) << "block,src,dst,value,gas\n0,1,x,65536,21000\n";
        CHECK_THROWS_AS(ingest_csv(path), ConfigError);
        std::ofstream(path) << "nope\n";
        CHECK_THROWS_AS(ingest_csv(path), ConfigError);
    }

    SUBCASE("generate -> export -> ingest is the identity") {
        auto blocks = materialize(small_poisson());
        export_csv(path, blocks);
        auto again = ingest_csv(path);
        REQUIRE(again.size() <= blocks.size());
        again.resize(blocks.size());
        CHECK(streams_equal(blocks, again));
    }

    std::remove(path.c_str());
}

TEST_CASE("trace matrix tallies arrivals under the static grouping") {
    TraceSpec s = small_poisson();
    auto m = build_trace_matrix(s);
    auto blocks = materialize(s);
    REQUIRE(m.counts.size() == blocks.size());
    for (size_t t = 0; t < blocks.size(); ++t) {
        uint64_t n = 0, g = 0;
        for (uint32_t c : m.counts[t]) n += c;
        for (const auto& tx : blocks[t]) g += tx.gas;
        CHECK(n == blocks[t].size());
        CHECK(g == m.gas[t]);
    }
}
