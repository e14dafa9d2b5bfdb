#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "elias_fano.hpp"
#include "y_fast_trie.hpp"

namespace dynef {

// Static predecessor structure: an Elias-Fano sequence cut into blocks of
// block_len ranks, with a y-fast trie routing each block's first value to
// its block index. A query routes to the unique block that can hold the
// answer, then binary searches ranks inside it.
struct sampled_predecessor {
    sampled_predecessor(elias_fano ef, uint64_t block_len)
        : m_ef(std::move(ef)), m_block_len(block_len), m_router(m_ef.universe()) {
        if (block_len < 2) throw std::invalid_argument("sampled_predecessor: block_len < 2");
        for (uint64_t r = 0; r < m_ef.size(); r += m_block_len) {
            m_router.insert(m_ef.access(r), r / m_block_len);
        }
    }

    static sampled_predecessor build(std::span<uint64_t const> values, uint64_t m,
                                     uint64_t block_len) {
        return sampled_predecessor(elias_fano::encode(values, m), block_len);
    }

    uint64_t size() const { return m_ef.size(); }
    uint64_t universe() const { return m_ef.universe(); }
    uint64_t block_len() const { return m_block_len; }
    uint64_t access(uint64_t i) const { return m_ef.access(i); }
    elias_fano const& sequence() const { return m_ef; }

    std::vector<uint64_t> heads() const {
        std::vector<uint64_t> out;
        m_router.for_each([&](uint64_t k, uint64_t) { out.push_back(k); });
        return out;
    }

    // Largest stored value strictly below x.
    std::optional<uint64_t> predecessor(uint64_t x) const {
        auto hit = m_router.predecessor(x);
        if (!hit) return std::nullopt;
        uint64_t lo = hit->second * m_block_len;
        uint64_t hi = std::min(lo + m_block_len, m_ef.size());
        while (hi - lo > 1) {
            uint64_t mid = lo + (hi - lo) / 2;
            if (m_ef.access(mid) < x) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return m_ef.access(lo);
    }

    uint64_t payload_bits() const { return m_ef.payload_bits(); }
    uint64_t router_bits() const { return m_router.audit_bits(); }

private:
    elias_fano m_ef;
    uint64_t m_block_len;
    y_fast_trie<uint64_t> m_router;
};

}  // namespace dynef
