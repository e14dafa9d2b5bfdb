#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "common.hpp"
#include "serialize.hpp"

namespace dynef {

// Plain bitmap plus an optional rank/select index. Queries require the index
// and the index is tied to a generation counter: mutating after build_index()
// makes rank/select throw until the index is rebuilt. Positions are 0-based
// everywhere; rank1(pos) counts strictly before pos, select1(i) returns the
// position of the i-th set bit.
struct bit_vector {
    static constexpr uint64_t rank_block = 512;   // bits per rank superblock
    static constexpr uint64_t select_rate = 512;  // occurrences per select sample

    bit_vector() : m_len(0), m_ones(0), m_generation(0), m_indexed_generation(0), m_indexed(false) {}

    explicit bit_vector(uint64_t len)
        : m_len(len), m_ones(0), m_words(words_for(len), 0), m_generation(0), m_indexed_generation(0), m_indexed(false) {}

    uint64_t size() const { return m_len; }
    uint64_t ones() const { return m_ones; }
    uint64_t zeros() const { return m_len - m_ones; }

    bool bit(uint64_t pos) const {
        if (pos >= m_len) throw std::out_of_range("bit_vector: position past end");
        return (m_words[pos >> 6] >> (pos & 63)) & 1;
    }

    void set_bit(uint64_t pos) {
        if (pos >= m_len) throw std::out_of_range("bit_vector: position past end");
        uint64_t const mask = uint64_t(1) << (pos & 63);
        if (m_words[pos >> 6] & mask) return;
        m_words[pos >> 6] |= mask;
        ++m_ones;
        ++m_generation;
    }

    void build_index() {
        uint64_t const blocks = (m_len + rank_block - 1) / rank_block;
        m_rank.assign(blocks + 1, 0);
        m_sel1.clear();
        m_sel0.clear();
        uint64_t ones = 0;
        uint64_t zs = 0;
        for (uint64_t w = 0; w != m_words.size(); ++w) {
            if ((w & 7) == 0) m_rank[w >> 3] = ones;
            uint64_t word = m_words[w];
            uint64_t const valid = w + 1 == m_words.size() && (m_len & 63) ? (m_len & 63) : 64;
            for (uint64_t b = 0; b != valid; ++b) {
                if ((word >> b) & 1) {
                    if (ones % select_rate == 0) m_sel1.push_back(w * 64 + b);
                    ++ones;
                } else {
                    if (zs % select_rate == 0) m_sel0.push_back(w * 64 + b);
                    ++zs;
                }
            }
        }
        m_rank[blocks] = ones;
        m_indexed = true;
        m_indexed_generation = m_generation;
    }

    bool index_current() const { return m_indexed && m_indexed_generation == m_generation; }

    // Set bits strictly before pos. Pre: pos <= size(), index current.
    uint64_t rank1(uint64_t pos) const {
        if (pos > m_len) throw std::out_of_range("bit_vector: rank past end");
        check_index();
        uint64_t r = m_rank[pos / rank_block];
        uint64_t w = (pos / rank_block) * 8;
        uint64_t const full = pos >> 6;
        for (; w < full; ++w) r += uint64_t(std::popcount(m_words[w]));
        if (pos & 63) r += uint64_t(std::popcount(m_words[full] & ((uint64_t(1) << (pos & 63)) - 1)));
        return r;
    }

    uint64_t rank0(uint64_t pos) const { return pos - rank1(pos); }

    // Position of the i-th set bit. Pre: i < ones(), index current.
    uint64_t select1(uint64_t i) const {
        if (i >= m_ones) throw std::out_of_range("bit_vector: select1 past last one");
        check_index();
        uint64_t const sampled = m_sel1[i / select_rate];
        if (i % select_rate == 0) return sampled;
        uint64_t const target = i + 1;
        uint64_t sb = sampled / rank_block;
        while (sb + 1 < m_rank.size() && m_rank[sb + 1] < target) ++sb;
        uint64_t r = m_rank[sb];
        for (uint64_t w = sb * 8;; ++w) {
            uint64_t const pc = uint64_t(std::popcount(m_words[w]));
            if (r + pc >= target) return w * 64 + select_in_word(m_words[w], unsigned(target - r - 1));
            r += pc;
        }
    }

    // Position of the i-th clear bit. Pre: i < zeros(), index current.
    uint64_t select0(uint64_t i) const {
        if (i >= zeros()) throw std::out_of_range("bit_vector: select0 past last zero");
        check_index();
        uint64_t const sampled = m_sel0[i / select_rate];
        if (i % select_rate == 0) return sampled;
        uint64_t const target = i + 1;
        uint64_t sb = sampled / rank_block;
        while (sb + 1 < m_rank.size() && zeros_before_block(sb + 1) < target) ++sb;
        uint64_t r = zeros_before_block(sb);
        for (uint64_t w = sb * 8;; ++w) {
            uint64_t word = ~m_words[w];
            if (w + 1 == m_words.size() && (m_len & 63)) word &= (uint64_t(1) << (m_len & 63)) - 1;
            uint64_t const pc = uint64_t(std::popcount(word));
            if (r + pc >= target) return w * 64 + select_in_word(word, unsigned(target - r - 1));
            r += pc;
        }
    }

    std::vector<uint64_t> const& words() const { return m_words; }
    std::vector<uint64_t> const& select_samples1() const { return m_sel1; }
    std::vector<uint64_t> const& select_samples0() const { return m_sel0; }

    uint64_t payload_bits() const { return m_len; }
    uint64_t index_bits() const {
        return 64 * (m_rank.size() + m_sel1.size() + m_sel0.size());
    }

    void serialize(byte_writer& out) const {
        out.magic("EFBV");
        out.u8(1);
        out.u64(m_len);
        out.u64(m_ones);
        out.words(m_words);
    }

    static bit_vector load(byte_reader& in) {
        in.magic("EFBV");
        if (in.u8() != 1) throw std::runtime_error("EFBV: unsupported version");
        bit_vector bv;
        bv.m_len = in.u64();
        bv.m_ones = in.u64();
        in.words(bv.m_words, words_for(bv.m_len));
        uint64_t check = 0;
        for (uint64_t w : bv.m_words) check += uint64_t(std::popcount(w));
        if (check != bv.m_ones) throw std::runtime_error("EFBV: population count mismatch");
        return bv;
    }

    bool operator==(bit_vector const& other) const {
        return m_len == other.m_len && m_ones == other.m_ones && m_words == other.m_words;
    }

private:
    void check_index() const {
        if (!index_current()) throw std::logic_error("bit_vector: stale or missing index");
    }
    uint64_t zeros_before_block(uint64_t sb) const {
        uint64_t const boundary = std::min(sb * rank_block, m_len);
        return boundary - m_rank[sb];
    }

    uint64_t m_len;
    uint64_t m_ones;
    std::vector<uint64_t> m_words;
    uint64_t m_generation;
    uint64_t m_indexed_generation;
    bool m_indexed;
    std::vector<uint64_t> m_rank;
    std::vector<uint64_t> m_sel1;
    std::vector<uint64_t> m_sel0;
};

}  // namespace dynef
