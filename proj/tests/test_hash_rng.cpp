#include <doctest.h>

#include <cmath>

#include "psap/rng.hpp"
#include "psap/sha256.hpp"

using namespace psap;

TEST_CASE("sha256 NIST vectors") {
    CHECK(hex(sha256(std::string(""))) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(hex(sha256(std::string("abc"))) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(hex(sha256(std::string(
              "abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq"))) ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
    // exercise the multi-block path
    std::string million(1000000, 'a');
    CHECK(hex(sha256(million)) ==
          "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST_CASE("rng streams are keyed by context") {
    Digest h = sha256(std::string("block"));
    DeterministicRng a(h, 5, "dropout");
    DeterministicRng b(h, 5, "dropout");
    DeterministicRng c(h, 5, "votes");
    DeterministicRng d(h, 6, "dropout");

    bool same_ab = true, same_ac = true, same_ad = true;
    for (int i = 0; i < 100; ++i) {
        uint64_t va = a.next_u64();
        same_ab &= (va == b.next_u64());
        same_ac &= (va == c.next_u64());
        same_ad &= (va == d.next_u64());
    }
    CHECK(same_ab);
    CHECK_FALSE(same_ac);
    CHECK_FALSE(same_ad);
}

TEST_CASE("uniform bounds and rough distribution") {
    DeterministicRng rng(99);
    uint64_t counts[8] = {0};
    for (int i = 0; i < 80000; ++i) ++counts[rng.uniform(8)];
    for (auto c : counts) {
        CHECK(c > 9000);
        CHECK(c < 11000);
    }
}

TEST_CASE("poisson mean tracks lambda") {
    DeterministicRng rng(123);
    for (double lambda : {0.5, 4.0, 25.0, 200.0}) {
        double sum = 0;
        const int n = 20000;
        for (int i = 0; i < n; ++i) sum += double(rng.poisson(lambda));
        double mean = sum / n;
        CHECK(std::abs(mean - lambda) < 4.0 * std::sqrt(lambda / n) + 0.01);
    }
}
