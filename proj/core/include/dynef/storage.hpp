#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "common.hpp"
#include "packed_array.hpp"

namespace dynef {

// Two-level dynamic array of fixed-width elements. Elements live in circular
// segments of equal capacity; every segment except the last is exactly full,
// so access(i) is one division away from its segment. Insert and erase shift
// inside one segment and ripple one element per later segment. The segment
// capacity tracks count^epsilon with 2x hysteresis (full rebuild on drift).
struct tiered_array {
    explicit tiered_array(uint64_t element_bits, double epsilon = 0.5)
        : m_width(element_bits), m_eps(epsilon) {
        if (element_bits > 64) throw std::invalid_argument("tiered_array: width > 64");
        if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
            throw std::invalid_argument("tiered_array: epsilon outside (0, 1)");
        }
    }

    static tiered_array from_values(std::span<uint64_t const> values, uint64_t element_bits,
                                    double epsilon = 0.5) {
        tiered_array a(element_bits, epsilon);
        a.m_cap = a.ideal_cap(values.size());
        for (uint64_t v : values) a.append(v);
        return a;
    }

    uint64_t size() const { return m_count; }
    bool empty() const { return m_count == 0; }
    uint64_t width() const { return m_width; }
    uint64_t segment_count() const { return m_segs.size(); }
    uint64_t segment_capacity() const { return m_cap; }

    uint64_t get(uint64_t i) const {
        if (i >= m_count) throw std::out_of_range("tiered_array: get past end");
        seg const& sg = m_segs[i / m_cap];
        return sg.store.get(phys(sg, i % m_cap));
    }

    void set(uint64_t i, uint64_t v) {
        if (i >= m_count) throw std::out_of_range("tiered_array: set past end");
        seg& sg = m_segs[i / m_cap];
        sg.store.set(phys(sg, i % m_cap), v);
    }

    void insert(uint64_t i, uint64_t v) {
        if (i > m_count) throw std::out_of_range("tiered_array: insert past end");
        maybe_rebuild(m_count + 1);
        if (i == m_count && (m_segs.empty() || m_segs.back().len == m_cap)) {
            m_segs.push_back(make_seg());
        }
        uint64_t s = std::min<uint64_t>(i / m_cap, m_segs.size() - 1);
        std::optional<uint64_t> carry;
        {
            seg& sg = m_segs[s];
            if (sg.len == m_cap) carry = seg_pop_back(sg);
            seg_insert(sg, i - s * m_cap, v);
        }
        for (uint64_t t = s + 1; carry; ++t) {
            if (t == m_segs.size()) m_segs.push_back(make_seg());
            seg& nx = m_segs[t];
            std::optional<uint64_t> next_carry;
            if (nx.len == m_cap) next_carry = seg_pop_back(nx);
            seg_push_front(nx, *carry);
            carry = next_carry;
        }
        ++m_count;
    }

    void append(uint64_t v) { insert(m_count, v); }

    uint64_t erase(uint64_t i) {
        if (i >= m_count) throw std::out_of_range("tiered_array: erase past end");
        uint64_t s = i / m_cap;
        uint64_t out = seg_erase(m_segs[s], i - s * m_cap);
        for (uint64_t t = s + 1; t < m_segs.size(); ++t) {
            seg_push_back(m_segs[t - 1], seg_pop_front(m_segs[t]));
        }
        if (m_segs.back().len == 0) m_segs.pop_back();
        --m_count;
        maybe_rebuild(m_count);
        return out;
    }

    std::vector<uint64_t> to_vector() const {
        std::vector<uint64_t> out;
        out.reserve(m_count);
        for (seg const& sg : m_segs) {
            for (uint64_t j = 0; j != sg.len; ++j) out.push_back(sg.store.get(phys(sg, j)));
        }
        return out;
    }

    void clear() {
        m_segs.clear();
        m_count = 0;
        m_cap = 4;
    }

    // Throws when the full-interior-segments layout is broken.
    void check() const {
        uint64_t total = 0;
        for (uint64_t s = 0; s != m_segs.size(); ++s) {
            if (m_segs[s].len > m_cap) throw std::logic_error("tiered_array: overfull segment");
            if (s + 1 != m_segs.size() && m_segs[s].len != m_cap) {
                throw std::logic_error("tiered_array: interior segment not full");
            }
            if (m_segs[s].len == 0) throw std::logic_error("tiered_array: empty segment kept");
            total += m_segs[s].len;
        }
        if (total != m_count) throw std::logic_error("tiered_array: count drift");
    }

    uint64_t payload_bits() const { return m_count * m_width; }

    uint64_t allocated_bits() const {
        uint64_t bits = 0;
        for (seg const& sg : m_segs) bits += sg.store.bits();
        return bits;
    }

    uint64_t bookkeeping_bits() const {
        return (sizeof(*this) + m_segs.capacity() * sizeof(seg)) * 8;
    }

private:
    struct seg {
        packed_array store;
        uint64_t head = 0;
        uint64_t len = 0;
    };

    uint64_t phys(seg const& sg, uint64_t j) const { return (sg.head + j) % m_cap; }

    seg make_seg() const { return seg{packed_array(m_cap, m_width), 0, 0}; }

    uint64_t ideal_cap(uint64_t count) const {
        double raw = std::pow(double(count), m_eps);
        auto cap = uint64_t(raw) + 1;
        return std::max<uint64_t>(4, cap);
    }

    void maybe_rebuild(uint64_t next_count) {
        uint64_t ideal = ideal_cap(next_count);
        if (ideal < 2 * m_cap && 2 * ideal > m_cap) return;
        std::vector<uint64_t> values = to_vector();
        m_segs.clear();
        m_cap = ideal;
        for (uint64_t v : values) {
            if (m_segs.empty() || m_segs.back().len == m_cap) m_segs.push_back(make_seg());
            seg& sg = m_segs.back();
            sg.store.set(phys(sg, sg.len), v);
            ++sg.len;
        }
    }

    void seg_insert(seg& sg, uint64_t j, uint64_t v) {
        for (uint64_t t = sg.len; t > j; --t) sg.store.set(phys(sg, t), sg.store.get(phys(sg, t - 1)));
        sg.store.set(phys(sg, j), v);
        ++sg.len;
    }

    uint64_t seg_erase(seg& sg, uint64_t j) {
        uint64_t out = sg.store.get(phys(sg, j));
        for (uint64_t t = j; t + 1 < sg.len; ++t) sg.store.set(phys(sg, t), sg.store.get(phys(sg, t + 1)));
        --sg.len;
        return out;
    }

    void seg_push_front(seg& sg, uint64_t v) {
        sg.head = (sg.head + m_cap - 1) % m_cap;
        sg.store.set(sg.head, v);
        ++sg.len;
    }

    void seg_push_back(seg& sg, uint64_t v) {
        sg.store.set(phys(sg, sg.len), v);
        ++sg.len;
    }

    uint64_t seg_pop_front(seg& sg) {
        uint64_t out = sg.store.get(sg.head);
        sg.head = (sg.head + 1) % m_cap;
        --sg.len;
        return out;
    }

    uint64_t seg_pop_back(seg& sg) {
        --sg.len;
        return sg.store.get(phys(sg, sg.len));
    }

    uint64_t m_width = 0;
    double m_eps = 0.5;
    uint64_t m_cap = 4;
    uint64_t m_count = 0;
    std::vector<seg> m_segs;
};

// Bit-block arena: bump allocation over one word buffer, an offset table
// giving O(1) address lookup, in-place realloc while the word-rounded
// capacity allows, relocation to fresh space otherwise, and compaction once
// dead words outweigh live ones. Block ids are stable across relocations.
struct block_store {
    explicit block_store(uint64_t max_block_bits) : m_max_bits(max_block_bits) {}

    uint64_t max_block_bits() const { return m_max_bits; }
    uint64_t block_count() const { return m_live_blocks; }
    uint64_t compactions() const { return m_compactions; }

    uint64_t allocate(uint64_t bits) {
        if (bits > m_max_bits) throw std::length_error("block_store: block above configured max");
        uint64_t id;
        if (!m_free_ids.empty()) {
            id = m_free_ids.back();
            m_free_ids.pop_back();
        } else {
            id = m_blocks.size();
            m_blocks.push_back({});
        }
        blk& b = m_blocks[id];
        b.cap_words = words_for(std::max<uint64_t>(bits, 1));
        b.len_bits = bits;
        b.off_words = bump(b.cap_words);
        std::memset(m_arena.data() + b.off_words, 0, b.cap_words * sizeof(uint64_t));
        ++m_live_blocks;
        return id;
    }

    void free_block(uint64_t id) {
        blk& b = live(id);
        m_dead_words += b.cap_words;
        b = blk{};
        m_free_ids.push_back(id);
        --m_live_blocks;
        maybe_compact();
    }

    void realloc_block(uint64_t id, uint64_t new_bits) {
        if (new_bits > m_max_bits) throw std::length_error("block_store: block above configured max");
        blk& b = live(id);
        uint64_t old_bits = b.len_bits;
        if (words_for(std::max<uint64_t>(new_bits, 1)) <= b.cap_words) {
            b.len_bits = new_bits;
            if (new_bits > old_bits) zero_range(b, old_bits, new_bits);
            return;
        }
        uint64_t new_words = words_for(new_bits);
        uint64_t new_off = bump(new_words);
        blk& moved = m_blocks[id];
        std::memcpy(m_arena.data() + new_off, m_arena.data() + moved.off_words,
                    words_for(moved.len_bits) * sizeof(uint64_t));
        std::memset(m_arena.data() + new_off + words_for(moved.len_bits), 0,
                    (new_words - words_for(moved.len_bits)) * sizeof(uint64_t));
        m_dead_words += moved.cap_words;
        moved.off_words = new_off;
        moved.cap_words = new_words;
        moved.len_bits = new_bits;
        if (new_bits > old_bits) zero_range(moved, old_bits, new_bits);
        maybe_compact();
    }

    uint64_t size_bits(uint64_t id) const { return live(id).len_bits; }

    // Valid until the next allocate, realloc_block, free_block, or compaction.
    uint64_t* address(uint64_t id) { return m_arena.data() + live(id).off_words; }
    uint64_t const* address(uint64_t id) const { return m_arena.data() + live(id).off_words; }

    uint64_t live_bits() const {
        uint64_t bits = 0;
        for (blk const& b : m_blocks) bits += b.len_bits;
        return bits;
    }

    uint64_t capacity_bits() const { return m_next_word * 64; }
    uint64_t arena_bits() const { return m_arena.size() * 64; }
    uint64_t dead_bits() const { return m_dead_words * 64; }

    uint64_t bookkeeping_bits() const {
        return (sizeof(*this) + m_blocks.capacity() * sizeof(blk) +
                m_free_ids.capacity() * sizeof(uint64_t)) * 8;
    }

private:
    struct blk {
        uint64_t off_words = 0;
        uint64_t cap_words = 0;
        uint64_t len_bits = 0;
    };

    blk& live(uint64_t id) {
        if (id >= m_blocks.size() || m_blocks[id].cap_words == 0) {
            throw std::out_of_range("block_store: dead block id");
        }
        return m_blocks[id];
    }

    blk const& live(uint64_t id) const { return const_cast<block_store*>(this)->live(id); }

    uint64_t bump(uint64_t words) {
        if (m_next_word + words > m_arena.size()) {
            m_arena.resize(std::max(m_arena.size() * 2, m_next_word + words), 0);
        }
        uint64_t off = m_next_word;
        m_next_word += words;
        return off;
    }

    void zero_range(blk const& b, uint64_t from_bit, uint64_t to_bit) {
        uint64_t* words = m_arena.data() + b.off_words;
        for (uint64_t pos = from_bit; pos < to_bit;) {
            uint64_t chunk = std::min<uint64_t>(64 - pos % 64, to_bit - pos);
            write_bits(words, pos, chunk, 0);
            pos += chunk;
        }
    }

    void maybe_compact() {
        if (m_dead_words <= m_next_word - m_dead_words) return;
        std::vector<uint64_t> fresh;
        fresh.reserve(m_next_word - m_dead_words);
        uint64_t cursor = 0;
        for (blk& b : m_blocks) {
            if (b.cap_words == 0) continue;
            uint64_t keep = words_for(std::max<uint64_t>(b.len_bits, 1));
            fresh.resize(cursor + keep, 0);
            std::memcpy(fresh.data() + cursor, m_arena.data() + b.off_words,
                        words_for(b.len_bits) * sizeof(uint64_t));
            b.off_words = cursor;
            b.cap_words = keep;
            cursor += keep;
        }
        m_arena = std::move(fresh);
        m_next_word = cursor;
        m_dead_words = 0;
        ++m_compactions;
    }

    uint64_t m_max_bits;
    std::vector<uint64_t> m_arena;
    std::vector<blk> m_blocks;
    std::vector<uint64_t> m_free_ids;
    uint64_t m_next_word = 0;
    uint64_t m_dead_words = 0;
    uint64_t m_live_blocks = 0;
    uint64_t m_compactions = 0;
};

}  // namespace dynef
