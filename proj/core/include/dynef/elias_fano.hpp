#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bit_vector.hpp"
#include "common.hpp"
#include "packed_array.hpp"
#include "serialize.hpp"
#include "space.hpp"

namespace dynef {

// Static two-part encoding of a non-decreasing sequence over [0, m]: each
// value splits into ell low bits, stored packed, and a high part written in
// negated unary into a bitmap of exactly n + bit_floor(n) bits (bit i + high_i
// set). ell starts at ceil(log2(m/n)) and is bumped until the high parts fit
// the fixed bitmap length, which can happen when n is not a power of two.
struct elias_fano {
    elias_fano() : m_n(0), m_m(0), m_ell(0) {}

    // forced_ell requests a wider/narrower low part (sealed append blocks use
    // this); it is raised the same way when the bitmap would overflow.
    static elias_fano encode(std::span<uint64_t const> values, uint64_t m,
                             std::optional<uint64_t> forced_ell = std::nullopt) {
        if (values.empty()) throw std::invalid_argument("elias_fano: empty input");
        uint64_t const n = values.size();
        for (uint64_t i = 0; i != n; ++i) {
            if (i && values[i] < values[i - 1]) throw std::invalid_argument("elias_fano: input not sorted");
            if (values[i] > m) throw std::invalid_argument("elias_fano: value past universe");
        }
        elias_fano ef;
        ef.m_n = n;
        ef.m_m = m;
        uint64_t ell = forced_ell ? *forced_ell : ceil_log2_ratio(m, n);
        uint64_t const buckets = std::bit_floor(n);
        while (ell < 64 && (m >> ell) > buckets) ++ell;
        ef.m_ell = ell;
        ef.m_low = packed_array(n, ell);
        ef.m_high = bit_vector(n + buckets);
        for (uint64_t i = 0; i != n; ++i) {
            ef.m_low.set(i, ell >= 64 ? values[i] : values[i] & ((uint64_t(1) << ell) - 1));
            ef.m_high.set_bit((ell >= 64 ? 0 : values[i] >> ell) + i);
        }
        ef.m_high.build_index();
        return ef;
    }

    uint64_t size() const { return m_n; }
    uint64_t universe() const { return m_m; }
    uint64_t low_bits() const { return m_ell; }

    uint64_t access(uint64_t i) const {
        if (i >= m_n) throw std::out_of_range("elias_fano: access past end");
        return ((m_high.select1(i) - i) << m_ell) | m_low.get(i);
    }

    // max{y in sequence : y < x}, strict.
    std::optional<uint64_t> predecessor(uint64_t x) const {
        auto [lo, hi] = bucket_range(m_ell >= 64 ? 0 : x >> m_ell);
        // Values in [lo, hi) share the high part of x; everything below lo is
        // smaller than any of them.
        uint64_t left = lo;
        uint64_t right = hi;
        while (left < right) {
            uint64_t mid = left + (right - left) / 2;
            if (access(mid) < x)
                left = mid + 1;
            else
                right = mid;
        }
        if (left > lo) return access(left - 1);
        if (lo > 0) return access(lo - 1);
        return std::nullopt;
    }

    // min{y in sequence : y >= x}.
    std::optional<uint64_t> successor(uint64_t x) const {
        auto [lo, hi] = bucket_range(m_ell >= 64 ? 0 : x >> m_ell);
        uint64_t left = lo;
        uint64_t right = hi;
        while (left < right) {
            uint64_t mid = left + (right - left) / 2;
            if (access(mid) < x)
                left = mid + 1;
            else
                right = mid;
        }
        if (left < hi) return access(left);
        if (hi < m_n) return access(hi);
        return std::nullopt;
    }

    std::vector<uint64_t> decode() const {
        std::vector<uint64_t> out(m_n);
        for (uint64_t i = 0; i != m_n; ++i) out[i] = access(i);
        return out;
    }

    bit_vector const& high() const { return m_high; }
    packed_array const& low() const { return m_low; }

    // Bits of the encoding proper: n*ell lows plus the n + bit_floor(n) bitmap.
    uint64_t payload_bits() const { return m_low.bits() + m_high.payload_bits(); }
    uint64_t index_bits() const { return m_high.index_bits(); }

    void serialize(byte_writer& out) const {
        out.magic("EFST");
        out.u8(1);
        out.u64(m_n);
        out.u64(m_m);
        out.u64(m_ell);
        m_high.serialize(out);
        out.words(m_low.words());
    }

    static elias_fano load(byte_reader& in) {
        in.magic("EFST");
        if (in.u8() != 1) throw std::runtime_error("EFST: unsupported version");
        elias_fano ef;
        ef.m_n = in.u64();
        ef.m_m = in.u64();
        ef.m_ell = in.u64();
        if (ef.m_ell > 64) throw std::runtime_error("EFST: low width out of range");
        ef.m_high = bit_vector::load(in);
        ef.m_low = packed_array(ef.m_n, ef.m_ell);
        in.words(ef.m_low.words(), words_for(ef.m_n * ef.m_ell));
        ef.m_high.build_index();
        return ef;
    }

private:
    // Ranks [lo, hi) of the values whose high part equals h.
    std::pair<uint64_t, uint64_t> bucket_range(uint64_t h) const {
        uint64_t const zs = m_high.zeros();
        uint64_t lo, hi;
        if (h == 0)
            lo = 0;
        else if (h - 1 < zs)
            lo = m_high.select0(h - 1) - (h - 1);
        else
            lo = m_n;
        if (h < zs)
            hi = m_high.select0(h) - h;
        else
            hi = m_n;
        return {lo, hi};
    }

    uint64_t m_n;
    uint64_t m_m;
    uint64_t m_ell;
    packed_array m_low;
    bit_vector m_high;
};

// Property-preserving split of a sorted strictly-increasing set at rank k:
// first part keeps values [0, k) with universe S[k-1]; second part stores
// S[l] - S[k-1] + 1 with universe S[n-1] - S[k-1] + 1. The summed ef_bits of
// the parts never exceeds ef_bits of the whole.
struct ef_split_result {
    elias_fano first;
    elias_fano second;
    uint64_t pivot;
};

inline ef_split_result ef_split(std::span<uint64_t const> values, uint64_t k) {
    if (k == 0 || k >= values.size()) throw std::invalid_argument("ef_split: k out of range");
    uint64_t const pivot = values[k - 1];
    std::vector<uint64_t> rest(values.begin() + ptrdiff_t(k), values.end());
    for (auto& v : rest) {
        if (v <= pivot) throw std::invalid_argument("ef_split: input not strictly increasing");
        v = v - pivot + 1;
    }
    ef_split_result r{elias_fano::encode(values.subspan(0, k), pivot),
                      elias_fano::encode(rest, values.back() - pivot + 1), pivot};
    return r;
}

inline ef_split_result ef_split(elias_fano const& ef, uint64_t k) {
    auto values = ef.decode();
    return ef_split(values, k);
}

}  // namespace dynef
