#pragma once

// Deterministic per-context RNG. Every stream is keyed by
// (block hash, step index, purpose label): the 32-bit seed is the low
// word of SHA256(H_b || t || purpose), and the stream itself is
// splitmix64 — small, fast, and fully specified by this file.

#include <cmath>
#include <cstdint>
#include <string>

#include "psap/sha256.hpp"

namespace psap {

class DeterministicRng {
public:
    /// Seed from a block hash, step index and purpose label.
    DeterministicRng(const Digest& block_hash, uint64_t step, const std::string& purpose) {
        Sha256 h;
        h.update(block_hash.data(), block_hash.size());
        h.update_u64(step);
        h.update(purpose);
        Digest d = h.finish();
        // low-order 32 bits of the big-endian digest value
        uint32_t seed = (uint32_t(d[28]) << 24) | (uint32_t(d[29]) << 16) |
                        (uint32_t(d[30]) << 8) | uint32_t(d[31]);
        state_ = uint64_t(seed) + 0x9e3779b97f4a7c15ULL;
    }

    explicit DeterministicRng(uint64_t raw_seed)
        : state_(raw_seed + 0x9e3779b97f4a7c15ULL) {}

    uint64_t next_u64() {
        // splitmix64
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    uint32_t next_u32() { return uint32_t(next_u64() >> 32); }

    /// Uniform in [0, n). n must be > 0. Uses rejection to stay unbiased.
    uint64_t uniform(uint64_t n) {
        uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Box-Muller gaussian.
    double gaussian(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 < 1e-300) u1 = 1e-300;
        double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        return mean + z * stddev;
    }

    /// Poisson sample; Knuth below lambda=30, rounded gaussian above.
    uint64_t poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        if (lambda < 30.0) {
            double l = std::exp(-lambda);
            uint64_t k = 0;
            double p = 1.0;
            do {
                ++k;
                p *= uniform01();
            } while (p > l);
            return k - 1;
        }
        double g = gaussian(lambda, std::sqrt(lambda));
        if (g < 0.0) return 0;
        return uint64_t(std::llround(g));
    }

private:
    uint64_t state_;
};

}  // namespace psap
