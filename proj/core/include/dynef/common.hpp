#pragma once

#include <bit>
#include <cassert>
#include <cstdint>
#include <stdexcept>

namespace dynef {

// Smallest e >= 0 with n * 2^e >= m, i.e. ceil(log2(m / n)) for positive
// real quotients. Zero when m <= n or n == 0.
inline uint64_t ceil_log2_ratio(uint64_t m, uint64_t n) {
    if (n == 0 || m <= n) return 0;
    uint64_t e = 0;
    while (e < 64 && (m >> e) + ((m & ((uint64_t(1) << e) - 1)) != 0 ? 1 : 0) > n) ++e;
    return e;
}

// ceil(log2(v)) for v >= 1.
inline uint64_t ceil_log2(uint64_t v) {
    assert(v >= 1);
    return v <= 1 ? 0 : 64 - uint64_t(std::countl_zero(v - 1));
}

// Bits needed to store values in [0, v].
inline uint64_t bits_for(uint64_t v) {
    return v == 0 ? 1 : 64 - uint64_t(std::countl_zero(v));
}

inline uint64_t words_for(uint64_t bits) { return (bits + 63) / 64; }

// Position of the r-th (0-based) set bit of w. Pre: r < popcount(w).
inline unsigned select_in_word(uint64_t w, unsigned r) {
    assert(r < unsigned(std::popcount(w)));
    for (unsigned i = 0; i < r; ++i) w &= w - 1;
    return unsigned(std::countr_zero(w));
}

// Read `width` bits starting at absolute bit position `pos` from a word
// array. width in [0, 64].
inline uint64_t read_bits(uint64_t const* words, uint64_t pos, uint64_t width) {
    if (width == 0) return 0;
    uint64_t const word = pos >> 6;
    uint64_t const off = pos & 63;
    uint64_t value = words[word] >> off;
    if (off + width > 64) value |= words[word + 1] << (64 - off);
    return width == 64 ? value : value & ((uint64_t(1) << width) - 1);
}

inline void write_bits(uint64_t* words, uint64_t pos, uint64_t width, uint64_t value) {
    if (width == 0) return;
    assert(width == 64 || value < (uint64_t(1) << width));
    uint64_t const word = pos >> 6;
    uint64_t const off = pos & 63;
    uint64_t const mask = width == 64 ? ~uint64_t(0) : ((uint64_t(1) << width) - 1);
    words[word] = (words[word] & ~(mask << off)) | (value << off);
    if (off + width > 64) {
        uint64_t const spill = 64 - off;
        words[word + 1] = (words[word + 1] & ~(mask >> spill)) | (value >> spill);
    }
}

}  // namespace dynef
