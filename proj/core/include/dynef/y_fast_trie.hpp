#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "common.hpp"

namespace dynef {

// Deterministic 64-bit mixer (splitmix64 finalizer) so hash layouts do not
// depend on the standard library's default hash.
struct fixed_hash64 {
    size_t operator()(uint64_t x) const noexcept {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return size_t(x ^ (x >> 31));
    }
};

// y-fast trie over keys in [0, universe] with satellite payloads.
// Representatives (one per bucket, always the bucket minimum) live in an
// x-fast trie: one hash table per prefix length, each entry holding the
// min and max leaf below that prefix. Buckets are sorted arrays whose size
// stays within [target/4, 2*target], target = max(4, key bits).
template <typename Payload>
struct y_fast_trie {
    struct leaf {
        uint64_t rep = 0;
        std::vector<std::pair<uint64_t, Payload>> bucket;
        leaf* prev = nullptr;
        leaf* next = nullptr;
    };

    explicit y_fast_trie(uint64_t universe)
        : m_universe(universe)
        , m_w(std::max<uint64_t>(1, bits_for(universe)))
        , m_target(std::max<uint64_t>(4, m_w))
        , m_levels(m_w + 1) {}

    y_fast_trie(y_fast_trie const&) = delete;
    y_fast_trie& operator=(y_fast_trie const&) = delete;

    y_fast_trie(y_fast_trie&& other) noexcept { steal(other); }

    y_fast_trie& operator=(y_fast_trie&& other) noexcept {
        if (this != &other) {
            destroy();
            steal(other);
        }
        return *this;
    }

    ~y_fast_trie() { destroy(); }

    uint64_t universe() const { return m_universe; }
    uint64_t key_bits() const { return m_w; }
    uint64_t bucket_target() const { return m_target; }
    uint64_t size() const { return m_size; }
    bool empty() const { return m_size == 0; }

    // Inserts or replaces; returns true when the key was new.
    bool insert(uint64_t key, Payload payload) {
        if (key > m_universe) throw std::out_of_range("y_fast_trie: key above universe");
        if (!m_first) {
            leaf* lf = new leaf{key, {{key, std::move(payload)}}, nullptr, nullptr};
            m_first = m_last = lf;
            xfast_insert(lf);
            m_size = 1;
            return true;
        }
        leaf* lf = rep_pred_leq(key, nullptr);
        if (!lf) {
            lf = m_first;
            lf->bucket.insert(lf->bucket.begin(), {key, std::move(payload)});
            rekey(lf, key);
        } else {
            auto it = std::lower_bound(lf->bucket.begin(), lf->bucket.end(), key,
                                       [](auto const& e, uint64_t k) { return e.first < k; });
            if (it != lf->bucket.end() && it->first == key) {
                it->second = std::move(payload);
                return false;
            }
            lf->bucket.insert(it, {key, std::move(payload)});
        }
        ++m_size;
        if (lf->bucket.size() > 2 * m_target) split(lf);
        return true;
    }

    // Removes the key, returning its payload when present.
    std::optional<Payload> erase(uint64_t key) {
        leaf* lf = rep_pred_leq(key, nullptr);
        if (!lf) return std::nullopt;
        auto it = std::lower_bound(lf->bucket.begin(), lf->bucket.end(), key,
                                   [](auto const& e, uint64_t k) { return e.first < k; });
        if (it == lf->bucket.end() || it->first != key) return std::nullopt;
        Payload out = std::move(it->second);
        lf->bucket.erase(it);
        --m_size;
        if (lf->bucket.empty()) {
            xfast_erase(lf);
            unlink_and_delete(lf);
        } else {
            if (lf->rep == key) rekey(lf, lf->bucket.front().first);
            if (lf->bucket.size() < m_target / 4) merge(lf);
        }
        return out;
    }

    std::optional<Payload> find(uint64_t key) const {
        leaf* lf = rep_pred_leq(key, nullptr);
        if (!lf) return std::nullopt;
        auto it = std::lower_bound(lf->bucket.begin(), lf->bucket.end(), key,
                                   [](auto const& e, uint64_t k) { return e.first < k; });
        if (it == lf->bucket.end() || it->first != key) return std::nullopt;
        return it->second;
    }

    // Largest stored key strictly below x.
    std::optional<std::pair<uint64_t, Payload>> predecessor(uint64_t x, uint64_t* probes = nullptr) const {
        if (probes) *probes = 0;
        if (x == 0 || !m_first) return std::nullopt;
        leaf* lf = rep_pred_leq(x - 1, probes);
        if (!lf) return std::nullopt;
        auto it = std::lower_bound(lf->bucket.begin(), lf->bucket.end(), x,
                                   [](auto const& e, uint64_t k) { return e.first < k; });
        return *(it - 1);
    }

    // Largest stored key at or below x.
    std::optional<std::pair<uint64_t, Payload>> pred_leq(uint64_t x, uint64_t* probes = nullptr) const {
        if (x == UINT64_MAX) {
            if (probes) *probes = 0;
            return max_entry();
        }
        return predecessor(x + 1, probes);
    }

    std::optional<std::pair<uint64_t, Payload>> min_entry() const {
        if (!m_first) return std::nullopt;
        return m_first->bucket.front();
    }

    std::optional<std::pair<uint64_t, Payload>> max_entry() const {
        if (!m_last) return std::nullopt;
        return m_last->bucket.back();
    }

    template <typename F>
    void for_each(F&& f) const {
        for (leaf* lf = m_first; lf; lf = lf->next) {
            for (auto const& e : lf->bucket) f(e.first, e.second);
        }
    }

    std::vector<uint64_t> bucket_sizes() const {
        std::vector<uint64_t> out;
        for (leaf* lf = m_first; lf; lf = lf->next) out.push_back(lf->bucket.size());
        return out;
    }

    void clear() {
        destroy();
        m_levels.assign(m_w + 1, level_map());
        m_first = m_last = nullptr;
        m_size = m_reps = 0;
    }

    // Structural space: prefix-table entries, leaves, and bucket storage.
    uint64_t audit_bits() const {
        uint64_t bytes = sizeof(*this);
        for (auto const& lvl : m_levels) bytes += lvl.size() * (sizeof(uint64_t) + sizeof(node));
        for (leaf* lf = m_first; lf; lf = lf->next) {
            bytes += sizeof(leaf) + lf->bucket.capacity() * sizeof(std::pair<uint64_t, Payload>);
        }
        return bytes * 8;
    }

private:
    struct node {
        leaf* mn;
        leaf* mx;
    };
    using level_map = std::unordered_map<uint64_t, node, fixed_hash64>;

    uint64_t prefix(uint64_t key, uint64_t d) const { return d == 0 ? 0 : key >> (m_w - d); }

    // Largest representative at or below x, found with a binary search over
    // prefix lengths. Each hash lookup bumps *probes.
    leaf* rep_pred_leq(uint64_t x, uint64_t* probes) const {
        if (!m_reps) return nullptr;
        if (x >= m_last->rep) return m_last;
        if (x < m_first->rep) return nullptr;
        uint64_t lo = 0;
        uint64_t hi = m_w;
        node best = {m_first, m_last};
        while (lo < hi) {
            uint64_t mid = lo + (hi - lo + 1) / 2;
            if (probes) ++*probes;
            auto it = m_levels[mid].find(prefix(x, mid));
            if (it != m_levels[mid].end()) {
                lo = mid;
                best = it->second;
            } else {
                hi = mid - 1;
            }
        }
        if (lo == m_w) return best.mn;
        if ((x >> (m_w - lo - 1)) & 1) return best.mx;
        return best.mn->prev;
    }

    void xfast_insert(leaf* lf) {
        for (uint64_t d = 1; d <= m_w; ++d) {
            auto [it, fresh] = m_levels[d].try_emplace(prefix(lf->rep, d), node{lf, lf});
            if (!fresh) {
                if (lf->rep < it->second.mn->rep) it->second.mn = lf;
                if (lf->rep > it->second.mx->rep) it->second.mx = lf;
            }
        }
        ++m_reps;
    }

    // Requires lf still linked with its old rep.
    void xfast_erase(leaf* lf) {
        for (uint64_t d = 1; d <= m_w; ++d) {
            auto it = m_levels[d].find(prefix(lf->rep, d));
            if (it->second.mn == lf && it->second.mx == lf) {
                m_levels[d].erase(it);
            } else {
                if (it->second.mn == lf) it->second.mn = lf->next;
                if (it->second.mx == lf) it->second.mx = lf->prev;
            }
        }
        --m_reps;
    }

    void rekey(leaf* lf, uint64_t new_rep) {
        xfast_erase(lf);
        lf->rep = new_rep;
        xfast_insert(lf);
    }

    void link_after(leaf* pos, leaf* lf) {
        lf->prev = pos;
        lf->next = pos->next;
        if (pos->next) pos->next->prev = lf;
        pos->next = lf;
        if (m_last == pos) m_last = lf;
    }

    void unlink_and_delete(leaf* lf) {
        if (lf->prev) lf->prev->next = lf->next;
        if (lf->next) lf->next->prev = lf->prev;
        if (m_first == lf) m_first = lf->next;
        if (m_last == lf) m_last = lf->prev;
        delete lf;
    }

    void split(leaf* lf) {
        size_t keep = lf->bucket.size() / 2;
        leaf* up = new leaf;
        up->bucket.assign(lf->bucket.begin() + ptrdiff_t(keep), lf->bucket.end());
        lf->bucket.resize(keep);
        up->rep = up->bucket.front().first;
        link_after(lf, up);
        xfast_insert(up);
    }

    void merge(leaf* lf) {
        if (lf->next) {
            leaf* nx = lf->next;
            xfast_erase(lf);
            nx->bucket.insert(nx->bucket.begin(), lf->bucket.begin(), lf->bucket.end());
            unlink_and_delete(lf);
            rekey(nx, nx->bucket.front().first);
            if (nx->bucket.size() > 2 * m_target) split(nx);
        } else if (lf->prev) {
            leaf* pv = lf->prev;
            xfast_erase(lf);
            pv->bucket.insert(pv->bucket.end(), lf->bucket.begin(), lf->bucket.end());
            unlink_and_delete(lf);
            if (pv->bucket.size() > 2 * m_target) split(pv);
        }
    }

    void steal(y_fast_trie& other) {
        m_universe = other.m_universe;
        m_w = other.m_w;
        m_target = other.m_target;
        m_levels = std::move(other.m_levels);
        m_first = other.m_first;
        m_last = other.m_last;
        m_size = other.m_size;
        m_reps = other.m_reps;
        other.m_levels.assign(other.m_w + 1, level_map());
        other.m_first = other.m_last = nullptr;
        other.m_size = other.m_reps = 0;
    }

    void destroy() {
        leaf* lf = m_first;
        while (lf) {
            leaf* nx = lf->next;
            delete lf;
            lf = nx;
        }
        m_first = m_last = nullptr;
    }

    uint64_t m_universe = 0;
    uint64_t m_w = 1;
    uint64_t m_target = 4;
    std::vector<level_map> m_levels;
    leaf* m_first = nullptr;
    leaf* m_last = nullptr;
    uint64_t m_size = 0;
    uint64_t m_reps = 0;
};

}  // namespace dynef
