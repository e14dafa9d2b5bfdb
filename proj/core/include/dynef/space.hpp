#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "common.hpp"

namespace dynef {

// Bits taken by the two-part encoding of an n-element subset of [0, m]:
// n*phi + n + ceil(m / 2^phi) with phi = ceil(log2(m / n)). Zero for n == 0.
inline uint64_t ef_bits(uint64_t n, uint64_t m) {
    if (n == 0) return 0;
    uint64_t const phi = ceil_log2_ratio(m, n);
    uint64_t const bucket = uint64_t(1) << phi;
    return n * phi + n + (m + bucket - 1) / bucket;
}

namespace detail {

// Unsigned big integer, base 2^32 limbs stored in 64-bit slots so that
// limb * small fits without overflow.
struct big_uint {
    std::vector<uint64_t> limbs{1};

    void mul(uint64_t k) {
        unsigned __int128 carry = 0;
        for (auto& limb : limbs) {
            unsigned __int128 v = (unsigned __int128)(limb)*k + carry;
            limb = uint64_t(v) & 0xffffffffu;
            carry = v >> 32;
        }
        while (carry) {
            limbs.push_back(uint64_t(carry) & 0xffffffffu);
            carry >>= 32;
        }
    }

    void div(uint64_t k) {
        unsigned __int128 rem = 0;
        for (size_t i = limbs.size(); i-- > 0;) {
            unsigned __int128 v = (rem << 32) | limbs[i];
            limbs[i] = uint64_t(v / k);
            rem = v % k;
        }
        while (limbs.size() > 1 && limbs.back() == 0) limbs.pop_back();
    }

    uint64_t ceil_log2() const {
        uint64_t top = limbs.back();
        uint64_t bits = (limbs.size() - 1) * 32 + bits_for(top);
        bool pow2 = (top & (top - 1)) == 0;
        for (size_t i = 0; pow2 && i + 1 < limbs.size(); ++i) pow2 = limbs[i] == 0;
        return pow2 ? bits - 1 : bits;
    }
};

inline uint64_t b_bits_exact(uint64_t n, uint64_t m) {
    // C(m+1, n) built incrementally; every intermediate division is exact.
    uint64_t const u = m + 1;
    uint64_t const r = n > u - n ? u - n : n;
    big_uint c;
    for (uint64_t i = 1; i <= r; ++i) {
        c.mul(u - r + i);
        c.div(i);
    }
    if (c.limbs.size() == 1 && c.limbs[0] <= 1) return 0;
    return c.ceil_log2();
}

}  // namespace detail

// ceil(log2 C(m+1, n)): the information-theoretic minimum for an n-element
// subset of the inclusive universe [0, m]. Exact big-integer arithmetic up to
// m = 2^20; above that log-gamma with directed rounding, falling back to the
// exact path when the rounding interval straddles an integer.
inline uint64_t b_bits(uint64_t n, uint64_t m) {
    if (n == 0 || n > m + 1) return 0;
    if (m < (uint64_t(1) << 20)) return detail::b_bits_exact(n, m);
    long double const ln2 = 0.6931471805599453094L;
    long double const u = (long double)(m) + 1.0L;
    long double log2c = (std::lgamma(u + 1.0L) - std::lgamma((long double)(n) + 1.0L) -
                         std::lgamma(u - (long double)(n) + 1.0L)) /
                        ln2;
    long double const slack = 1e-6L;
    long double lo = std::ceil(log2c - slack);
    long double hi = std::ceil(log2c + slack);
    if (lo == hi) return uint64_t(lo);
    return detail::b_bits_exact(n, m);
}

// One audited structure, as reported by the space commands and acceptance
// checks. redundancy_bits may be negative when an encoding beats the
// subset-enumeration bound thanks to metadata not counted in b_bits.
struct space_report {
    uint64_t ef_bits;
    uint64_t b_bits;
    uint64_t measured_bits;
    int64_t redundancy_bits;  // measured - b_bits

    static space_report make(uint64_t n, uint64_t m, uint64_t measured) {
        space_report r;
        r.ef_bits = dynef::ef_bits(n, m);
        r.b_bits = dynef::b_bits(n, m);
        r.measured_bits = measured;
        r.redundancy_bits = int64_t(measured) - int64_t(r.b_bits);
        return r;
    }
};

}  // namespace dynef
