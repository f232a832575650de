#pragma once

// Q47.16 saturating fixed-point scalar.
//
// This is the numeric contract for every deterministic code path in the
// simulator: identical operand sequences produce identical raw bit
// patterns on every platform and every run. All arithmetic is pure
// 64/128-bit integer work — no floating point, no libm — so the contract
// holds across compilers and hardware.
//
// Rounding on multiply/divide/sqrt is round-to-nearest-even on the
// discarded fraction. Overflow saturates to the representable range and
// bumps a process-wide counter; it is never silent wraparound.

#include <cstdint>
#include <cstdlib>
#include <limits>
#include <string>

namespace psap {

namespace detail {
inline uint64_t& saturation_counter() {
    static uint64_t count = 0;
    return count;
}
}  // namespace detail

class FixedPoint {
public:
    static constexpr int kFracBits = 16;
    static constexpr int64_t kOne = int64_t{1} << kFracBits;
    static constexpr int64_t kRawMax = std::numeric_limits<int64_t>::max();
    static constexpr int64_t kRawMin = std::numeric_limits<int64_t>::min();

    constexpr FixedPoint() : raw_(0) {}

    static constexpr FixedPoint from_raw(int64_t raw) {
        FixedPoint f;
        f.raw_ = raw;
        return f;
    }

    static constexpr FixedPoint from_int(int64_t v) {
        // Values beyond +/-2^47 are not representable; saturate.
        if (v > (kRawMax >> kFracBits)) return saturate_pos();
        if (v < (kRawMin >> kFracBits)) return saturate_neg();
        return from_raw(v << kFracBits);
    }

    /// Exact rational constructor: num/den rounded to nearest-even raw.
    static FixedPoint ratio(int64_t num, int64_t den);

    /// Conversion from double, round-to-nearest. For config and test
    /// fixtures only — never inside a deterministic replay path.
    static FixedPoint from_double(double v);

    constexpr int64_t raw() const { return raw_; }
    double to_double() const { return static_cast<double>(raw_) / kOne; }
    int64_t floor_int() const { return raw_ >> kFracBits; }

    /// Nearest integer, ties to even.
    int64_t round_int() const;

    static constexpr FixedPoint zero() { return from_raw(0); }
    static constexpr FixedPoint one() { return from_raw(kOne); }
    static constexpr FixedPoint saturate_pos() { return from_raw(kRawMax); }
    static constexpr FixedPoint saturate_neg() { return from_raw(kRawMin); }

    /// Process-wide count of saturated operations since start (or last reset).
    static uint64_t saturation_count() { return detail::saturation_counter(); }
    static void reset_saturation_count() { detail::saturation_counter() = 0; }

    FixedPoint operator+(FixedPoint o) const;
    FixedPoint operator-(FixedPoint o) const;
    FixedPoint operator*(FixedPoint o) const;
    FixedPoint operator/(FixedPoint o) const;
    FixedPoint operator-() const;

    FixedPoint& operator+=(FixedPoint o) { *this = *this + o; return *this; }
    FixedPoint& operator-=(FixedPoint o) { *this = *this - o; return *this; }
    FixedPoint& operator*=(FixedPoint o) { *this = *this * o; return *this; }
    FixedPoint& operator/=(FixedPoint o) { *this = *this / o; return *this; }

    constexpr bool operator==(const FixedPoint&) const = default;
    constexpr auto operator<=>(const FixedPoint&) const = default;

    FixedPoint abs() const { return raw_ < 0 ? -*this : *this; }

    /// sqrt of a non-negative value; negative input saturates negative
    /// and counts as a saturation event.
    FixedPoint sqrt() const;

    /// e^x with range clamping: inputs below -22 return 0, above +32
    /// saturate. Pure integer evaluation (base-2 decomposition plus a
    /// fixed polynomial), identical everywhere.
    FixedPoint exp() const;

    /// Logistic 1/(1+e^-x), saturating to exact 0/1 outside +/-16.
    FixedPoint sigmoid() const;

    /// tanh via the logistic identity, exact +/-1 outside +/-8.
    FixedPoint tanh() const;

    std::string to_string() const;

private:
    int64_t raw_;
};

inline FixedPoint min(FixedPoint a, FixedPoint b) { return a < b ? a : b; }
inline FixedPoint max(FixedPoint a, FixedPoint b) { return a < b ? b : a; }

}  // namespace psap
