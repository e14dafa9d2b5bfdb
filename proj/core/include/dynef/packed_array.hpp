#pragma once

#include <cstdint>
#include <vector>

#include "common.hpp"

namespace dynef {

// Fixed-width field array packed into 64-bit words. Width 0 stores nothing
// and reads back zeros.
struct packed_array {
    packed_array() : m_size(0), m_width(0) {}
    packed_array(uint64_t size, uint64_t width)
        : m_size(size), m_width(width), m_words(words_for(size * width), 0) {
        assert(width <= 64);
    }

    uint64_t get(uint64_t i) const {
        assert(i < m_size);
        return m_width == 0 ? 0 : read_bits(m_words.data(), i * m_width, m_width);
    }
    void set(uint64_t i, uint64_t v) {
        assert(i < m_size);
        if (m_width != 0) write_bits(m_words.data(), i * m_width, m_width, v);
    }

    uint64_t size() const { return m_size; }
    uint64_t width() const { return m_width; }
    uint64_t bits() const { return m_size * m_width; }
    std::vector<uint64_t> const& words() const { return m_words; }
    std::vector<uint64_t>& words() { return m_words; }

private:
    uint64_t m_size;
    uint64_t m_width;
    std::vector<uint64_t> m_words;
};

}  // namespace dynef
