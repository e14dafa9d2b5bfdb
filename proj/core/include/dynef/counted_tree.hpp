#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "common.hpp"

namespace dynef {

// Order-statistics index over a sequence of entries, each an opaque id
// carrying an element count. A shallow counted B-tree supports rank
// location, count updates, neighbor lookup, and ordered insertion and
// removal, every operation touching O(fanout * height) words.
struct counted_tree {
    explicit counted_tree(uint64_t fanout) : m_fanout(std::max<uint64_t>(4, fanout)) {
        m_root = new_node(true, npos);
    }

    uint64_t fanout() const { return m_fanout; }
    uint64_t entries() const { return m_entries; }
    bool empty() const { return m_entries == 0; }

    uint64_t total() const {
        auto const& ps = m_nodes[m_root].psum;
        return ps.empty() ? 0 : ps.back();
    }

    // First entry of an empty index.
    void insert_first(uint32_t id, uint64_t count) {
        if (m_entries != 0) throw std::logic_error("counted_tree: not empty");
        node& rt = m_nodes[m_root];
        rt.items.push_back(id);
        rt.psum.push_back(count);
        m_leaf_of[id] = m_root;
        m_entries = 1;
    }

    // Places id directly after an existing entry.
    void insert_after(uint32_t prev, uint32_t id, uint64_t count) {
        if (m_leaf_of.count(id)) throw std::logic_error("counted_tree: duplicate id");
        uint32_t leaf = leaf_of(prev);
        uint64_t slot = slot_of(leaf, prev);
        node& lf = m_nodes[leaf];
        lf.items.insert(lf.items.begin() + ptrdiff_t(slot) + 1, id);
        lf.psum.insert(lf.psum.begin() + ptrdiff_t(slot) + 1, lf.psum[slot] + count);
        for (uint64_t j = slot + 2; j < lf.psum.size(); ++j) lf.psum[j] += count;
        m_leaf_of[id] = leaf;
        ++m_entries;
        bump_up(leaf, int64_t(count));
        fix_overflow(leaf);
    }

    void remove(uint32_t id) {
        uint32_t leaf = leaf_of(id);
        uint64_t slot = slot_of(leaf, id);
        node& lf = m_nodes[leaf];
        uint64_t count = lf.psum[slot] - (slot ? lf.psum[slot - 1] : 0);
        lf.items.erase(lf.items.begin() + ptrdiff_t(slot));
        lf.psum.erase(lf.psum.begin() + ptrdiff_t(slot));
        for (uint64_t j = slot; j < lf.psum.size(); ++j) lf.psum[j] -= count;
        m_leaf_of.erase(id);
        --m_entries;
        bump_up(leaf, -int64_t(count));
        fix_underflow(leaf);
    }

    // Adjusts the element count of one entry.
    void add(uint32_t id, int64_t delta) {
        if (delta == 0) return;
        uint32_t leaf = leaf_of(id);
        uint64_t slot = slot_of(leaf, id);
        node& lf = m_nodes[leaf];
        for (uint64_t j = slot; j < lf.psum.size(); ++j)
            lf.psum[j] = uint64_t(int64_t(lf.psum[j]) + delta);
        bump_up(leaf, delta);
    }

    struct location {
        uint32_t id;
        uint64_t local;
    };

    // Entry holding global rank i plus the rank inside it.
    location locate(uint64_t i) const {
        if (i >= total()) throw std::out_of_range("counted_tree: rank out of range");
        uint32_t nid = m_root;
        for (;;) {
            node const& nd = m_nodes[nid];
            auto it = std::upper_bound(nd.psum.begin(), nd.psum.end(), i);
            uint64_t j = uint64_t(it - nd.psum.begin());
            if (j > 0) i -= nd.psum[j - 1];
            if (nd.leaf) return {nd.items[j], i};
            nid = nd.items[j];
        }
    }

    // Elements held by entries before id.
    uint64_t prefix_of(uint32_t id) const {
        uint32_t cur = leaf_of(id);
        uint64_t slot = slot_of(cur, id);
        uint64_t acc = slot ? m_nodes[cur].psum[slot - 1] : 0;
        while (m_nodes[cur].parent != npos) {
            uint32_t par = m_nodes[cur].parent;
            uint64_t idx = child_index(par, cur);
            if (idx > 0) acc += m_nodes[par].psum[idx - 1];
            cur = par;
        }
        return acc;
    }

    uint64_t count_of(uint32_t id) const {
        uint32_t leaf = leaf_of(id);
        uint64_t slot = slot_of(leaf, id);
        node const& lf = m_nodes[leaf];
        return lf.psum[slot] - (slot ? lf.psum[slot - 1] : 0);
    }

    bool contains(uint32_t id) const { return m_leaf_of.count(id) != 0; }

    std::optional<uint32_t> prev_id(uint32_t id) const {
        uint32_t cur = leaf_of(id);
        uint64_t slot = slot_of(cur, id);
        if (slot > 0) return m_nodes[cur].items[slot - 1];
        while (m_nodes[cur].parent != npos) {
            uint32_t par = m_nodes[cur].parent;
            uint64_t idx = child_index(par, cur);
            if (idx > 0) return last_entry(m_nodes[par].items[idx - 1]);
            cur = par;
        }
        return std::nullopt;
    }

    std::optional<uint32_t> next_id(uint32_t id) const {
        uint32_t cur = leaf_of(id);
        uint64_t slot = slot_of(cur, id);
        if (slot + 1 < m_nodes[cur].items.size()) return m_nodes[cur].items[slot + 1];
        while (m_nodes[cur].parent != npos) {
            uint32_t par = m_nodes[cur].parent;
            uint64_t idx = child_index(par, cur);
            if (idx + 1 < m_nodes[par].items.size())
                return first_entry(m_nodes[par].items[idx + 1]);
            cur = par;
        }
        return std::nullopt;
    }

    std::optional<uint32_t> first_id() const {
        if (m_entries == 0) return std::nullopt;
        return first_entry(m_root);
    }

    std::optional<uint32_t> last_id() const {
        if (m_entries == 0) return std::nullopt;
        return last_entry(m_root);
    }

    uint64_t height_edges() const {
        uint64_t h = 0;
        uint32_t nid = m_root;
        while (!m_nodes[nid].leaf) {
            nid = m_nodes[nid].items.front();
            ++h;
        }
        return h;
    }

    void clear() {
        m_nodes.clear();
        m_free.clear();
        m_leaf_of.clear();
        m_entries = 0;
        m_root = new_node(true, npos);
    }

    uint64_t bookkeeping_bits() const {
        uint64_t bits = 0;
        for (auto const& nd : m_nodes)
            bits += 8 * 64 + 32 * uint64_t(nd.items.size()) + 64 * uint64_t(nd.psum.size());
        bits += uint64_t(m_leaf_of.size()) * 3 * 64;
        return bits;
    }

    void audit() const {
        uint64_t seen = 0;
        int64_t leaf_depth = -1;
        audit_node(m_root, npos, 0, true, leaf_depth, seen);
        if (seen != m_entries) fail("entry count drift");
        if (seen != m_leaf_of.size()) fail("membership map drift");
        if (m_entries >= 2) {
            double need = std::log2(double(m_entries)) / std::log2(double(m_fanout));
            if (double(height_edges()) > need + 1.0) fail("height above the budget");
        }
    }

private:
    static constexpr uint32_t npos = UINT32_MAX;

    struct node {
        bool leaf = true;
        uint32_t parent = npos;
        std::vector<uint32_t> items;  // entry ids in a leaf, node ids otherwise
        std::vector<uint64_t> psum;   // inclusive element-count prefix sums
    };

    uint64_t m_fanout;
    uint64_t m_entries = 0;
    uint32_t m_root = 0;
    std::vector<node> m_nodes;
    std::vector<uint32_t> m_free;
    std::unordered_map<uint32_t, uint32_t> m_leaf_of;

    [[noreturn]] static void fail(char const* msg) {
        throw std::logic_error(std::string("counted_tree: ") + msg);
    }

    uint32_t new_node(bool leaf, uint32_t parent) {
        uint32_t id;
        if (!m_free.empty()) {
            id = m_free.back();
            m_free.pop_back();
            m_nodes[id] = node{};
        } else {
            m_nodes.emplace_back();
            id = uint32_t(m_nodes.size() - 1);
        }
        m_nodes[id].leaf = leaf;
        m_nodes[id].parent = parent;
        return id;
    }

    void free_node(uint32_t id) {
        m_nodes[id] = node{};
        m_free.push_back(id);
    }

    uint32_t leaf_of(uint32_t id) const {
        auto it = m_leaf_of.find(id);
        if (it == m_leaf_of.end()) fail("unknown id");
        return it->second;
    }

    uint64_t slot_of(uint32_t leaf, uint32_t id) const {
        auto const& items = m_nodes[leaf].items;
        auto it = std::find(items.begin(), items.end(), id);
        if (it == items.end()) fail("membership map stale");
        return uint64_t(it - items.begin());
    }

    uint64_t child_index(uint32_t parent, uint32_t child) const {
        auto const& items = m_nodes[parent].items;
        auto it = std::find(items.begin(), items.end(), child);
        if (it == items.end()) fail("parent pointer stale");
        return uint64_t(it - items.begin());
    }

    uint64_t node_total(uint32_t nid) const {
        auto const& ps = m_nodes[nid].psum;
        return ps.empty() ? 0 : ps.back();
    }

    uint32_t first_entry(uint32_t nid) const {
        while (!m_nodes[nid].leaf) nid = m_nodes[nid].items.front();
        return m_nodes[nid].items.front();
    }

    uint32_t last_entry(uint32_t nid) const {
        while (!m_nodes[nid].leaf) nid = m_nodes[nid].items.back();
        return m_nodes[nid].items.back();
    }

    // Adds delta to every ancestor's counts at and after the child taken.
    void bump_up(uint32_t nid, int64_t delta) {
        uint32_t cur = nid;
        while (m_nodes[cur].parent != npos) {
            uint32_t par = m_nodes[cur].parent;
            node& pn = m_nodes[par];
            for (uint64_t j = child_index(par, cur); j < pn.psum.size(); ++j)
                pn.psum[j] = uint64_t(int64_t(pn.psum[j]) + delta);
            cur = par;
        }
    }

    static std::vector<uint64_t> node_counts(node const& nd) {
        std::vector<uint64_t> c(nd.psum.size());
        uint64_t prev = 0;
        for (uint64_t i = 0; i < nd.psum.size(); ++i) {
            c[i] = nd.psum[i] - prev;
            prev = nd.psum[i];
        }
        return c;
    }

    static void set_psums(node& nd, std::vector<uint64_t> const& counts) {
        nd.psum.resize(counts.size());
        uint64_t acc = 0;
        for (uint64_t i = 0; i < counts.size(); ++i) {
            acc += counts[i];
            nd.psum[i] = acc;
        }
    }

    // Recomputes an internal node's psums from its children's totals.
    void refresh_internal(uint32_t nid) {
        node& nd = m_nodes[nid];
        std::vector<uint64_t> counts(nd.items.size());
        for (uint64_t i = 0; i < nd.items.size(); ++i) counts[i] = node_total(nd.items[i]);
        set_psums(nd, counts);
    }

    void adopt(uint32_t nid) {
        node const& nd = m_nodes[nid];
        if (nd.leaf) {
            for (uint32_t id : nd.items) m_leaf_of[id] = nid;
        } else {
            for (uint32_t child : nd.items) m_nodes[child].parent = nid;
        }
    }

    void fix_overflow(uint32_t nid) {
        while (m_nodes[nid].items.size() > 2 * m_fanout) {
            uint64_t half = m_nodes[nid].items.size() / 2;
            bool leaf = m_nodes[nid].leaf;
            uint32_t rid = new_node(leaf, m_nodes[nid].parent);
            {
                node& nd = m_nodes[nid];
                node& rn = m_nodes[rid];
                auto counts = node_counts(nd);
                rn.items.assign(nd.items.begin() + ptrdiff_t(half), nd.items.end());
                nd.items.resize(half);
                std::vector<uint64_t> rc(counts.begin() + ptrdiff_t(half), counts.end());
                counts.resize(half);
                set_psums(nd, counts);
                set_psums(rn, rc);
            }
            adopt(rid);
            uint32_t parent = m_nodes[nid].parent;
            if (parent == npos) {
                uint32_t root = new_node(false, npos);
                m_nodes[root].items = {nid, rid};
                m_nodes[nid].parent = root;
                m_nodes[rid].parent = root;
                refresh_internal(root);
                m_root = root;
                return;
            }
            node& pn = m_nodes[parent];
            uint64_t idx = child_index(parent, nid);
            pn.items.insert(pn.items.begin() + ptrdiff_t(idx) + 1, rid);
            refresh_internal(parent);
            nid = parent;
        }
    }

    void fix_underflow(uint32_t nid) {
        for (;;) {
            if (m_nodes[nid].parent == npos) {
                node& rt = m_nodes[nid];
                if (!rt.leaf && rt.items.size() == 1) {
                    uint32_t child = rt.items[0];
                    m_nodes[child].parent = npos;
                    m_root = child;
                    free_node(nid);
                }
                return;
            }
            if (m_nodes[nid].items.size() >= m_fanout) return;
            uint32_t par = m_nodes[nid].parent;
            uint64_t idx = child_index(par, nid);
            bool right = idx + 1 < m_nodes[par].items.size();
            uint32_t sib = right ? m_nodes[par].items[idx + 1] : m_nodes[par].items[idx - 1];
            if (m_nodes[sib].items.size() > m_fanout) {
                node& nn = m_nodes[nid];
                node& sn = m_nodes[sib];
                auto ncounts = node_counts(nn);
                auto scounts = node_counts(sn);
                if (right) {
                    nn.items.push_back(sn.items.front());
                    ncounts.push_back(scounts.front());
                    sn.items.erase(sn.items.begin());
                    scounts.erase(scounts.begin());
                } else {
                    nn.items.insert(nn.items.begin(), sn.items.back());
                    ncounts.insert(ncounts.begin(), scounts.back());
                    sn.items.pop_back();
                    scounts.pop_back();
                }
                set_psums(nn, ncounts);
                set_psums(sn, scounts);
                adopt(nid);
                refresh_internal(par);
                return;
            }
            uint32_t l = right ? nid : sib;
            uint32_t rgt = right ? sib : nid;
            {
                node& ln = m_nodes[l];
                node& rn = m_nodes[rgt];
                auto lcounts = node_counts(ln);
                auto rcounts = node_counts(rn);
                ln.items.insert(ln.items.end(), rn.items.begin(), rn.items.end());
                lcounts.insert(lcounts.end(), rcounts.begin(), rcounts.end());
                set_psums(ln, lcounts);
            }
            adopt(l);
            node& pn = m_nodes[par];
            pn.items.erase(pn.items.begin() + ptrdiff_t(child_index(par, rgt)));
            refresh_internal(par);
            free_node(rgt);
            nid = par;
        }
    }

    void audit_node(uint32_t nid, uint32_t parent, int64_t depth, bool root, int64_t& leaf_depth,
                    uint64_t& seen) const {
        node const& nd = m_nodes[nid];
        if (nd.parent != parent) fail("parent pointer wrong");
        if (nd.items.size() != nd.psum.size()) fail("psum length mismatch");
        if (nd.items.size() > 2 * m_fanout) fail("fanout above the cap");
        if (root) {
            if (!nd.leaf && nd.items.size() < 2) fail("internal root below two children");
        } else if (nd.items.size() < m_fanout) {
            fail("fanout below the floor");
        }
        for (uint64_t i = 1; i < nd.psum.size(); ++i)
            if (nd.psum[i] < nd.psum[i - 1]) fail("psum not monotone");
        if (nd.leaf) {
            if (leaf_depth < 0) leaf_depth = depth;
            else if (leaf_depth != depth) fail("leaves at unequal depth");
            for (uint32_t id : nd.items) {
                auto it = m_leaf_of.find(id);
                if (it == m_leaf_of.end() || it->second != nid) fail("membership map wrong");
            }
            seen += nd.items.size();
            return;
        }
        uint64_t acc = 0;
        for (uint64_t i = 0; i < nd.items.size(); ++i) {
            acc += node_total(nd.items[i]);
            if (nd.psum[i] != acc) fail("stale prefix count");
        }
        for (uint32_t child : nd.items)
            audit_node(child, nid, depth + 1, false, leaf_depth, seen);
    }
};

}  // namespace dynef
