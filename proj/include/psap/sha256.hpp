#pragma once

// Minimal SHA-256 (FIPS 180-4). Implemented in-repo so the deterministic
// kernel — block hashing, RNG seeding, Merkle roots, checkpoint hashes —
// has zero external dependencies and can be audited in one file.
// Verified against the NIST short-message vectors in the test suite.

#include <array>
#include <cstdint>
#include <cstddef>
#include <string>
#include <vector>

namespace psap {

using Digest = std::array<uint8_t, 32>;

class Sha256 {
public:
    Sha256() { reset(); }

    void reset();
    void update(const uint8_t* data, size_t len);
    void update(const std::string& s) {
        update(reinterpret_cast<const uint8_t*>(s.data()), s.size());
    }
    void update(const std::vector<uint8_t>& v) { update(v.data(), v.size()); }

    /// Append a big-endian 64-bit integer.
    void update_u64(uint64_t v);
    void update_u32(uint32_t v);

    Digest finish();

private:
    void process_block(const uint8_t* block);

    uint32_t state_[8];
    uint64_t bit_len_;
    uint8_t buf_[64];
    size_t buf_len_;
};

Digest sha256(const uint8_t* data, size_t len);
Digest sha256(const std::string& s);
Digest sha256(const std::vector<uint8_t>& v);

std::string hex(const Digest& d);

}  // namespace psap
