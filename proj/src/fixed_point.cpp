#include "psap/fixed_point.hpp"

#include <cmath>

namespace psap {

namespace {

using i128 = __int128;
using u128 = unsigned __int128;

constexpr i128 kI64Max = FixedPoint::kRawMax;
constexpr i128 kI64Min = FixedPoint::kRawMin;

int64_t clamp_raw(i128 v) {
    if (v > kI64Max) {
        ++detail::saturation_counter();
        return FixedPoint::kRawMax;
    }
    if (v < kI64Min) {
        ++detail::saturation_counter();
        return FixedPoint::kRawMin;
    }
    return static_cast<int64_t>(v);
}

// Round-to-nearest-even shift-right by `bits`. Works on the full 128-bit
// value so the caller clamps afterwards.
i128 rne_shift(i128 v, int bits) {
    const i128 one = i128{1} << bits;
    i128 q = v >> bits;          // floor division by 2^bits
    i128 rem = v - (q << bits);  // in [0, 2^bits)
    const i128 half = one >> 1;
    if (rem > half || (rem == half && (q & 1))) ++q;
    return q;
}

// Round-to-nearest-even unsigned division. num, den > 0.
u128 rne_udiv(u128 num, u128 den) {
    u128 q = num / den;
    u128 rem = num - q * den;
    u128 twice = rem * 2;
    if (twice > den || (twice == den && (q & 1))) ++q;
    return q;
}

// Floor integer sqrt of a 128-bit value.
u128 isqrt_u128(u128 n) {
    if (n == 0) return 0;
    u128 x = n;
    u128 r = 0;
    u128 bit = u128{1} << 126;
    while (bit > n) bit >>= 2;
    while (bit != 0) {
        if (x >= r + bit) {
            x -= r + bit;
            r = (r >> 1) + bit;
        } else {
            r >>= 1;
        }
        bit >>= 2;
    }
    return r;
}

}  // namespace

FixedPoint FixedPoint::ratio(int64_t num, int64_t den) {
    if (den == 0) {
        ++detail::saturation_counter();
        return num >= 0 ? saturate_pos() : saturate_neg();
    }
    bool neg = (num < 0) != (den < 0);
    u128 n = num < 0 ? u128(0) - u128(i128(num)) : u128(i128(num));
    u128 d = den < 0 ? u128(0) - u128(i128(den)) : u128(i128(den));
    u128 q = rne_udiv(n << kFracBits, d);
    i128 signedq = neg ? -i128(q) : i128(q);
    return from_raw(clamp_raw(signedq));
}

FixedPoint FixedPoint::from_double(double v) {
    if (std::isnan(v)) return zero();
    double scaled = v * static_cast<double>(kOne);
    if (scaled >= static_cast<double>(kRawMax)) {
        ++detail::saturation_counter();
        return saturate_pos();
    }
    if (scaled <= static_cast<double>(kRawMin)) {
        ++detail::saturation_counter();
        return saturate_neg();
    }
    return from_raw(static_cast<int64_t>(std::llround(scaled)));
}

int64_t FixedPoint::round_int() const {
    return static_cast<int64_t>(rne_shift(i128(raw_), kFracBits));
}

FixedPoint FixedPoint::operator+(FixedPoint o) const {
    int64_t out;
    if (__builtin_add_overflow(raw_, o.raw_, &out)) {
        ++detail::saturation_counter();
        return raw_ > 0 ? saturate_pos() : saturate_neg();
    }
    return from_raw(out);
}

FixedPoint FixedPoint::operator-(FixedPoint o) const {
    int64_t out;
    if (__builtin_sub_overflow(raw_, o.raw_, &out)) {
        ++detail::saturation_counter();
        return raw_ > 0 ? saturate_pos() : saturate_neg();
    }
    return from_raw(out);
}

FixedPoint FixedPoint::operator-() const {
    if (raw_ == kRawMin) {
        ++detail::saturation_counter();
        return saturate_pos();
    }
    return from_raw(-raw_);
}

FixedPoint FixedPoint::operator*(FixedPoint o) const {
    i128 prod = i128(raw_) * i128(o.raw_);
    return from_raw(clamp_raw(rne_shift(prod, kFracBits)));
}

FixedPoint FixedPoint::operator/(FixedPoint o) const {
    if (o.raw_ == 0) {
        ++detail::saturation_counter();
        return raw_ >= 0 ? saturate_pos() : saturate_neg();
    }
    bool neg = (raw_ < 0) != (o.raw_ < 0);
    u128 n = raw_ < 0 ? u128(0) - u128(i128(raw_)) : u128(i128(raw_));
    u128 d = o.raw_ < 0 ? u128(0) - u128(i128(o.raw_)) : u128(i128(o.raw_));
    u128 q = rne_udiv(n << kFracBits, d);
    i128 signedq = neg ? -i128(q) : i128(q);
    return from_raw(clamp_raw(signedq));
}

FixedPoint FixedPoint::sqrt() const {
    if (raw_ < 0) {
        ++detail::saturation_counter();
        return saturate_neg();
    }
    // sqrt(raw / 2^16) * 2^16 == sqrt(raw * 2^16); round to nearest.
    u128 n = u128(raw_) << kFracBits;
    u128 s = isqrt_u128(n);
    // nearest: bump when n is past the midpoint (s + 1/2)^2 = s^2 + s + 1/4.
    if (n - s * s > s) ++s;
    return from_raw(clamp_raw(i128(s)));
}

namespace {

// exp(x) = 2^(x*log2e) = 2^n * 2^f, f in [0,1). 2^f evaluated as a
// degree-6 polynomial in f*ln2 (Taylor of e^y, y in [0, ln2)), all in
// Q16 integer arithmetic. Worst-case error is a few ulp, dominated by
// the Q16 grid itself.
const FixedPoint kLog2E = FixedPoint::from_raw(94548);   // log2(e)
const FixedPoint kLn2 = FixedPoint::from_raw(45426);     // ln(2)

FixedPoint exp2_frac(FixedPoint f) {
    FixedPoint y = f * kLn2;
    FixedPoint acc = FixedPoint::one();
    // Horner: 1 + y(1 + y/2(1 + y/3(1 + y/4(1 + y/5(1 + y/6)))))
    for (int k = 6; k >= 1; --k) {
        acc = FixedPoint::one() + y * acc / FixedPoint::from_int(k);
    }
    return acc;
}

}  // namespace

FixedPoint FixedPoint::exp() const {
    if (raw_ <= -22 * kOne) return zero();
    if (raw_ >= 32 * kOne) {
        ++detail::saturation_counter();
        return saturate_pos();
    }
    FixedPoint t = *this * kLog2E;
    int64_t n = t.raw_ >> kFracBits;  // floor
    FixedPoint f = from_raw(t.raw_ - (n << kFracBits));
    FixedPoint m = exp2_frac(f);
    if (n >= 0) {
        i128 shifted = i128(m.raw_) << n;
        return from_raw(clamp_raw(shifted));
    }
    return from_raw(static_cast<int64_t>(rne_shift(i128(m.raw_), static_cast<int>(-n))));
}

FixedPoint FixedPoint::sigmoid() const {
    if (raw_ >= 16 * kOne) return one();
    if (raw_ <= -16 * kOne) return zero();
    // 1 / (1 + e^-x); evaluate e^-|x| to keep the intermediate small.
    FixedPoint e = (-abs()).exp();
    FixedPoint pos = one() / (one() + e);
    if (raw_ >= 0) return pos;
    return one() - pos;
}

FixedPoint FixedPoint::tanh() const {
    if (raw_ >= 8 * kOne) return one();
    if (raw_ <= -8 * kOne) return -one();
    FixedPoint two = from_int(2);
    return two * (two * *this).sigmoid() - one();
}

std::string FixedPoint::to_string() const {
    // Decimal with full 16-bit fraction resolution (5 digits is exact
    // enough for 2^-16 ~ 1.5e-5 display granularity is 6 digits).
    int64_t r = raw_;
    bool neg = r < 0;
    uint64_t mag = neg ? (r == kRawMin ? (uint64_t{1} << 63) : uint64_t(-r)) : uint64_t(r);
    uint64_t ip = mag >> kFracBits;
    uint64_t frac = mag & (kOne - 1);
    // frac/65536 in micro-units, round to nearest.
    uint64_t micro = (frac * 1000000 + kOne / 2) >> kFracBits;
    if (micro == 1000000) {
        ++ip;
        micro = 0;
    }
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s%llu.%06llu", neg ? "-" : "",
                  static_cast<unsigned long long>(ip),
                  static_cast<unsigned long long>(micro));
    return std::string(buf);
}

}  // namespace psap
