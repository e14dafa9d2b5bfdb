#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "common.hpp"
#include "storage.hpp"

namespace dynef {

// Parameters of one capacity class. Everything derives from n_hat, the
// power-of-two class size; they stay fixed until the owner migrates the
// contents to a different class.
struct sst_params {
    uint64_t capacity_class = 0;  // n_hat, power of two, at least 1024
    uint64_t cap_mini = 0;        // center mini-block size
    uint64_t tau = 0;             // minimum tree fanout, maximum is 4*tau
    uint64_t tree_capacity = 0;   // intended element count per tree
    uint64_t rebuild_period = 0;  // updates between low-width rebuilds
    uint64_t low_arrays = 0;      // tiered arrays holding the low halves
    uint64_t max_block_bits = 0;  // high-bitmap allocation ceiling

    static sst_params for_class(uint64_t n_hat) {
        sst_params p;
        p.capacity_class = std::bit_ceil(std::max<uint64_t>(n_hat, uint64_t(1) << 10));
        double lg = double(ceil_log2(p.capacity_class));
        double llg = std::log2(lg);
        p.cap_mini = std::max<uint64_t>(8, uint64_t(std::ceil(llg * llg)));
        p.tau = std::max<uint64_t>(4, uint64_t(std::ceil(std::pow(lg, 2.0 / 3.0))));
        p.tree_capacity = uint64_t(std::ceil(lg * llg * lg * llg));
        p.rebuild_period = uint64_t(std::ceil(lg * lg * llg));
        p.low_arrays = std::max<uint64_t>(2, p.cap_mini);
        p.max_block_bits = 2 * p.tree_capacity + 256;
        return p;
    }
};

// Ordered set of up to a few times tree_capacity keys, stored as Elias-Fano
// mini-blocks that all share one low width mu. High bitmaps live in a
// block_store, low halves in a few tiered arrays, and a shallow counted
// B-tree over the blocks answers rank and value routing. The universe is
// advisory: keys above it are accepted, and a key whose bucket span would
// not fit a high bitmap triggers a full rebuild with a fresh mu.
struct small_set_tree {
    small_set_tree(uint64_t universe, sst_params const& params)
        : m_params(params)
        , m_universe(universe)
        , m_store(params.max_block_bits) {
        build_from_sorted({});
    }

    static small_set_tree from_sorted(std::span<uint64_t const> values, uint64_t universe,
                                      sst_params const& params) {
        small_set_tree t(universe, params);
        t.build_from_sorted(values);
        return t;
    }

    // Replaces the contents with the given strictly increasing values,
    // recomputing mu and resetting the update counter.
    void assign_sorted(std::span<uint64_t const> values) { build_from_sorted(values); }

    bool insert(uint64_t x) {
        if (size() == 0) {
            init_single(x);
            bump_updates();
            return true;
        }
        std::vector<path_step> path;
        uint32_t leaf = route_value(x, path, nullptr);
        uint32_t slot = path.back().child;
        uint32_t bid = m_nodes[leaf].items[slot];
        std::vector<uint64_t> vals;
        decode_block(bid, vals);
        auto it = std::lower_bound(vals.begin(), vals.end(), x);
        if (it != vals.end() && *it == x) return false;
        uint64_t r = uint64_t(it - vals.begin());
        vals.insert(it, x);
        if (!h_fits(vals)) {
            rebuild_full(x);
            return true;
        }
        low_insert(bid, r, low_of(x));
        if (vals.size() <= 2 * m_params.cap_mini) {
            rewrite_block(bid, vals);
            bump_path(path, path.size(), +1);
        } else {
            uint64_t half = vals.size() / 2;
            rewrite_block(bid, {vals.data(), half});
            uint32_t arr = m_blocks[bid].array;
            uint32_t off = m_blocks[bid].offset;
            uint32_t rid = create_block({vals.data() + half, vals.size() - half}, arr,
                                        off + uint32_t(half));
            auto& list = m_array_blocks[arr];
            list.insert(list.begin() + ptrdiff_t(list_index(arr, bid)) + 1, rid);
            node& lf = m_nodes[leaf];
            lf.items.insert(lf.items.begin() + slot + 1, rid);
            recompute_psums(leaf);
            bump_path(path, path.size() - 1, +1);
            fix_overflow(path);
        }
        bump_updates();
        return true;
    }

    bool erase(uint64_t x) {
        if (size() == 0) return false;
        std::vector<path_step> path;
        uint32_t leaf = route_value(x, path, nullptr);
        uint32_t slot = path.back().child;
        uint32_t bid = m_nodes[leaf].items[slot];
        std::vector<uint64_t> vals;
        decode_block(bid, vals);
        auto it = std::lower_bound(vals.begin(), vals.end(), x);
        if (it == vals.end() || *it != x) return false;
        uint64_t r = uint64_t(it - vals.begin());
        vals.erase(it);
        low_erase(bid, r);
        bump_path(path, path.size(), -1);
        if (vals.empty()) {
            release_block(bid);
            node& lf = m_nodes[leaf];
            lf.items.erase(lf.items.begin() + slot);
            recompute_psums(leaf);
            fix_underflow(path);
        } else {
            rewrite_block(bid, vals);
            if (vals.size() < m_params.cap_mini / 2 && m_nodes[leaf].items.size() > 1)
                merge_block(leaf, slot, path);
        }
        bump_updates();
        return true;
    }

    bool contains(uint64_t x) const {
        if (size() == 0) return false;
        std::vector<path_step> path;
        uint32_t leaf = route_value(x, path, nullptr);
        uint32_t bid = m_nodes[leaf].items[path.back().child];
        std::vector<uint64_t> vals;
        decode_block(bid, vals);
        return std::binary_search(vals.begin(), vals.end(), x);
    }

    uint64_t access(uint64_t i) const {
        if (i >= size()) throw std::out_of_range("small_set_tree: rank out of range");
        uint32_t nid = m_root;
        for (;;) {
            node const& nd = m_nodes[nid];
            auto it = std::upper_bound(nd.psum.begin(), nd.psum.end(), uint32_t(i));
            uint32_t j = uint32_t(it - nd.psum.begin());
            if (j > 0) i -= nd.psum[j - 1];
            if (nd.leaf) return block_access(nd.items[j], i);
            nid = nd.items[j];
        }
    }

    std::optional<uint64_t> predecessor(uint64_t x) const {
        if (size() == 0) return std::nullopt;
        std::vector<path_step> path;
        uint32_t prev = npos;
        uint32_t leaf = route_value(x, path, &prev);
        uint32_t bid = m_nodes[leaf].items[path.back().child];
        std::vector<uint64_t> vals;
        decode_block(bid, vals);
        auto it = std::lower_bound(vals.begin(), vals.end(), x);
        if (it != vals.begin()) return *std::prev(it);
        if (prev != npos) return block_last(prev);
        return std::nullopt;
    }

    // Number of stored keys strictly below x.
    uint64_t rank_lt(uint64_t x) const {
        if (size() == 0) return 0;
        std::vector<path_step> path;
        uint32_t leaf = route_value(x, path, nullptr);
        uint64_t r = 0;
        for (auto const& st : path)
            if (st.child > 0) r += m_nodes[st.node].psum[st.child - 1];
        uint32_t bid = m_nodes[leaf].items[path.back().child];
        std::vector<uint64_t> vals;
        decode_block(bid, vals);
        r += uint64_t(std::lower_bound(vals.begin(), vals.end(), x) - vals.begin());
        return r;
    }

    uint64_t size() const {
        auto const& ps = m_nodes[m_root].psum;
        return ps.empty() ? 0 : ps.back();
    }
    bool empty() const { return size() == 0; }

    uint64_t min_value() const {
        if (size() == 0) throw std::logic_error("small_set_tree: empty");
        uint32_t nid = m_root;
        while (!m_nodes[nid].leaf) nid = m_nodes[nid].items.front();
        return block_access(m_nodes[nid].items.front(), 0);
    }

    uint64_t max_value() const {
        if (size() == 0) throw std::logic_error("small_set_tree: empty");
        return block_last(rightmost_block(m_root));
    }

    std::vector<uint64_t> to_vector() const {
        std::vector<uint64_t> out;
        out.reserve(size());
        collect(m_root, out);
        return out;
    }

    uint64_t universe() const { return m_universe; }
    uint64_t low_width() const { return m_mu; }
    uint64_t updates_since_rebuild() const { return m_updates; }
    uint64_t rebuild_count() const { return m_rebuilds; }
    sst_params const& params() const { return m_params; }

    uint64_t height_edges() const {
        uint64_t h = 0;
        uint32_t nid = m_root;
        while (!m_nodes[nid].leaf) {
            nid = m_nodes[nid].items.front();
            ++h;
        }
        return h;
    }

    // Decodes everything and rebuilds with mu recomputed from the current
    // contents. Runs automatically every rebuild_period updates.
    void rebuild_low_width() { rebuild_full(std::nullopt); }

    uint64_t payload_bits() const { return m_store.live_bits() + size() * m_mu; }

    uint64_t bookkeeping_bits() const {
        uint64_t bits = m_store.bookkeeping_bits();
        for (auto const& a : m_arrays) bits += a.bookkeeping_bits();
        for (auto const& nd : m_nodes)
            bits += 6 * 64 + 32 * uint64_t(nd.items.size() + nd.psum.size());
        bits += uint64_t(m_blocks.size()) * sizeof(mini_block) * 8;
        for (auto const& l : m_array_blocks) bits += 64 + 32 * uint64_t(l.size());
        return bits;
    }

    uint64_t measured_bits() const {
        uint64_t bits = m_store.arena_bits();
        for (auto const& a : m_arrays) bits += a.allocated_bits();
        return bits + bookkeeping_bits();
    }

    // Full structural verification; throws std::logic_error on any breach.
    void audit() const {
        uint64_t blocks_listed = 0;
        for (uint32_t a = 0; a < m_array_blocks.size(); ++a) {
            uint64_t off = 0;
            for (uint32_t bid : m_array_blocks[a]) {
                mini_block const& b = m_blocks[bid];
                if (b.array != a) fail("block listed under the wrong array");
                if (b.offset != off) fail("array runs do not tile the array");
                off += b.count;
            }
            if (off != m_arrays[a].size()) fail("array size disagrees with its runs");
            m_arrays[a].check();
            blocks_listed += m_array_blocks[a].size();
        }
        uint64_t blocks_seen = 0;
        int64_t leaf_depth = -1;
        uint64_t prev_last = 0;
        bool any = false;
        audit_node(m_root, 0, true, leaf_depth, prev_last, any, blocks_seen);
        if (blocks_seen != blocks_listed) fail("array lists disagree with the tree");
        if (leaf_depth > 3) fail("tree height exceeds three edges");
    }

private:
    static constexpr uint32_t npos = UINT32_MAX;

    struct mini_block {
        uint32_t count = 0;
        uint32_t array = 0;
        uint32_t offset = 0;
        uint64_t base_bucket = 0;
        uint64_t store_id = 0;
    };

    struct node {
        bool leaf = true;
        std::vector<uint32_t> items;  // block ids in a leaf, node ids otherwise
        std::vector<uint32_t> psum;   // inclusive prefix counts per child
    };

    struct path_step {
        uint32_t node;
        uint32_t child;
    };

    sst_params m_params;
    uint64_t m_universe;
    uint64_t m_mu = 0;
    uint64_t m_updates = 0;
    uint64_t m_rebuilds = 0;
    uint64_t m_store_limit = 0;
    block_store m_store;
    std::vector<tiered_array> m_arrays;
    std::vector<std::vector<uint32_t>> m_array_blocks;
    std::vector<mini_block> m_blocks;
    std::vector<uint32_t> m_free_blocks;
    std::vector<node> m_nodes;
    std::vector<uint32_t> m_free_nodes;
    uint32_t m_root = 0;

    [[noreturn]] static void fail(char const* msg) {
        throw std::logic_error(std::string("small_set_tree: ") + msg);
    }

    uint64_t high_of(uint64_t v) const { return m_mu >= 64 ? 0 : v >> m_mu; }

    uint64_t low_of(uint64_t v) const {
        if (m_mu == 0) return 0;
        if (m_mu >= 64) return v;
        return v & ((uint64_t(1) << m_mu) - 1);
    }

    uint64_t h_len(std::span<uint64_t const> vals) const {
        return vals.size() + (high_of(vals.back()) - high_of(vals.front()));
    }

    bool h_fits(std::span<uint64_t const> vals) const { return h_len(vals) <= m_store_limit; }

    void write_h(uint64_t store_id, std::span<uint64_t const> vals, uint64_t base) {
        uint64_t* w = m_store.address(store_id);
        uint64_t words = words_for(m_store.size_bits(store_id));
        std::fill(w, w + words, 0);
        for (uint64_t i = 0; i < vals.size(); ++i) {
            uint64_t pos = (high_of(vals[i]) - base) + i;
            w[pos >> 6] |= uint64_t(1) << (pos & 63);
        }
    }

    uint32_t alloc_block_slot() {
        if (!m_free_blocks.empty()) {
            uint32_t id = m_free_blocks.back();
            m_free_blocks.pop_back();
            m_blocks[id] = mini_block{};
            return id;
        }
        m_blocks.emplace_back();
        return uint32_t(m_blocks.size() - 1);
    }

    // Lows must already sit at [offset, offset + vals.size()) in the array.
    uint32_t create_block(std::span<uint64_t const> vals, uint32_t array, uint32_t offset) {
        uint32_t id = alloc_block_slot();
        mini_block& b = m_blocks[id];
        b.count = uint32_t(vals.size());
        b.array = array;
        b.offset = offset;
        b.base_bucket = high_of(vals.front());
        b.store_id = m_store.allocate(h_len(vals));
        write_h(b.store_id, vals, b.base_bucket);
        return id;
    }

    void rewrite_block(uint32_t id, std::span<uint64_t const> vals) {
        mini_block& b = m_blocks[id];
        b.count = uint32_t(vals.size());
        b.base_bucket = high_of(vals.front());
        m_store.realloc_block(b.store_id, h_len(vals));
        write_h(b.store_id, vals, b.base_bucket);
    }

    void release_block(uint32_t id) {
        mini_block& b = m_blocks[id];
        auto& list = m_array_blocks[b.array];
        list.erase(list.begin() + ptrdiff_t(list_index(b.array, id)));
        m_store.free_block(b.store_id);
        m_free_blocks.push_back(id);
    }

    void decode_append(uint32_t id, std::vector<uint64_t>& out) const {
        mini_block const& b = m_blocks[id];
        uint64_t const* w = m_store.address(b.store_id);
        uint64_t len = m_store.size_bits(b.store_id);
        uint64_t r = 0;
        for (uint64_t wi = 0; wi * 64 < len; ++wi) {
            uint64_t word = w[wi];
            while (word) {
                uint64_t pos = wi * 64 + uint64_t(std::countr_zero(word));
                word &= word - 1;
                uint64_t hv = b.base_bucket + (pos - r);
                uint64_t lo = m_arrays[b.array].get(b.offset + r);
                out.push_back((m_mu >= 64 ? 0 : hv << m_mu) | lo);
                ++r;
            }
        }
    }

    void decode_block(uint32_t id, std::vector<uint64_t>& out) const {
        out.clear();
        out.reserve(m_blocks[id].count);
        decode_append(id, out);
    }

    uint64_t block_access(uint32_t id, uint64_t r) const {
        mini_block const& b = m_blocks[id];
        uint64_t const* w = m_store.address(b.store_id);
        uint64_t seen = 0;
        for (uint64_t wi = 0;; ++wi) {
            uint64_t pc = uint64_t(std::popcount(w[wi]));
            if (seen + pc > r) {
                uint64_t pos = wi * 64 + select_in_word(w[wi], r - seen);
                uint64_t hv = b.base_bucket + (pos - r);
                uint64_t lo = m_arrays[b.array].get(b.offset + r);
                return (m_mu >= 64 ? 0 : hv << m_mu) | lo;
            }
            seen += pc;
        }
    }

    // The final bit of a high bitmap is always set, so the last key of a
    // block is recovered from its top word alone.
    uint64_t block_last(uint32_t id) const {
        mini_block const& b = m_blocks[id];
        uint64_t const* w = m_store.address(b.store_id);
        uint64_t len = m_store.size_bits(b.store_id);
        uint64_t wi = (len - 1) >> 6;
        uint64_t pos = wi * 64 + (63 - uint64_t(std::countl_zero(w[wi])));
        uint64_t hv = b.base_bucket + (pos - (b.count - 1));
        uint64_t lo = m_arrays[b.array].get(b.offset + b.count - 1);
        return (m_mu >= 64 ? 0 : hv << m_mu) | lo;
    }

    uint32_t rightmost_block(uint32_t nid) const {
        while (!m_nodes[nid].leaf) nid = m_nodes[nid].items.back();
        return m_nodes[nid].items.back();
    }

    uint64_t subtree_last(uint32_t nid) const { return block_last(rightmost_block(nid)); }

    // Descends to the first block whose last key is >= x, clamping to the
    // rightmost block when x exceeds everything. Records the child index
    // taken at every level; prev, when requested, receives the block just
    // before the routed one in tree order.
    uint32_t route_value(uint64_t x, std::vector<path_step>& path, uint32_t* prev) const {
        if (prev) *prev = npos;
        uint32_t nid = m_root;
        while (!m_nodes[nid].leaf) {
            node const& nd = m_nodes[nid];
            uint32_t lo = 0;
            uint32_t hi = uint32_t(nd.items.size()) - 1;
            while (lo < hi) {
                uint32_t mid = (lo + hi) / 2;
                if (subtree_last(nd.items[mid]) >= x) hi = mid;
                else lo = mid + 1;
            }
            if (prev && lo > 0) *prev = rightmost_block(nd.items[lo - 1]);
            path.push_back({nid, lo});
            nid = nd.items[lo];
        }
        node const& lf = m_nodes[nid];
        uint32_t lo = 0;
        uint32_t hi = uint32_t(lf.items.size()) - 1;
        while (lo < hi) {
            uint32_t mid = (lo + hi) / 2;
            if (block_last(lf.items[mid]) >= x) hi = mid;
            else lo = mid + 1;
        }
        if (prev && lo > 0) *prev = lf.items[lo - 1];
        path.push_back({nid, lo});
        return nid;
    }

    void recompute_psums(uint32_t nid) {
        node& nd = m_nodes[nid];
        nd.psum.resize(nd.items.size());
        uint32_t acc = 0;
        for (uint64_t j = 0; j < nd.items.size(); ++j) {
            acc += nd.leaf ? m_blocks[nd.items[j]].count : m_nodes[nd.items[j]].psum.back();
            nd.psum[j] = acc;
        }
    }

    // Adds delta to the counts at and after the taken child in the first
    // `levels` steps of the path.
    void bump_path(std::vector<path_step> const& path, uint64_t levels, int64_t delta) {
        for (uint64_t i = 0; i < levels; ++i) {
            node& nd = m_nodes[path[i].node];
            for (uint64_t j = path[i].child; j < nd.psum.size(); ++j)
                nd.psum[j] = uint32_t(int64_t(nd.psum[j]) + delta);
        }
    }

    uint64_t list_index(uint32_t array, uint32_t block) const {
        auto const& list = m_array_blocks[array];
        auto it = std::find(list.begin(), list.end(), block);
        if (it == list.end()) fail("block missing from its array list");
        return uint64_t(it - list.begin());
    }

    void shift_offsets_after(uint32_t array, uint64_t idx, int64_t delta) {
        auto const& list = m_array_blocks[array];
        for (uint64_t j = idx + 1; j < list.size(); ++j)
            m_blocks[list[j]].offset = uint32_t(int64_t(m_blocks[list[j]].offset) + delta);
    }

    void low_insert(uint32_t bid, uint64_t r, uint64_t lo) {
        mini_block& b = m_blocks[bid];
        m_arrays[b.array].insert(b.offset + r, lo);
        shift_offsets_after(b.array, list_index(b.array, bid), +1);
    }

    void low_erase(uint32_t bid, uint64_t r) {
        mini_block& b = m_blocks[bid];
        m_arrays[b.array].erase(b.offset + r);
        shift_offsets_after(b.array, list_index(b.array, bid), -1);
    }

    void init_single(uint64_t x) {
        uint64_t v[1] = {x};
        m_arrays[0].insert(0, low_of(x));
        uint32_t bid = create_block({v, 1}, 0, 0);
        m_array_blocks[0].push_back(bid);
        node& rt = m_nodes[m_root];
        rt.items.push_back(bid);
        recompute_psums(m_root);
    }

    // Merges the underflowing block at `slot` with a neighbor in the same
    // leaf, re-splitting when the union is too large. Leaves with a single
    // block never reach this point.
    void merge_block(uint32_t leaf, uint32_t slot, std::vector<path_step>& path) {
        node& lf = m_nodes[leaf];
        uint32_t lslot = slot + 1 < lf.items.size() ? slot : slot - 1;
        uint32_t l = lf.items[lslot];
        uint32_t rgt = lf.items[lslot + 1];
        std::vector<uint64_t> comb;
        decode_block(l, comb);
        std::vector<uint64_t> rv;
        decode_block(rgt, rv);
        uint64_t keep = comb.size();
        comb.insert(comb.end(), rv.begin(), rv.end());
        if (!h_fits(comb)) {
            rebuild_full(std::nullopt);
            return;
        }
        // Move the right lows to the end of the left run.
        {
            mini_block const& rb = m_blocks[rgt];
            uint32_t rarr = rb.array;
            uint32_t roff = rb.offset;
            uint32_t rcount = rb.count;
            uint64_t ridx = list_index(rarr, rgt);
            for (uint32_t i = 0; i < rcount; ++i) m_arrays[rarr].erase(roff);
            shift_offsets_after(rarr, ridx, -int64_t(rcount));
            auto& rlist = m_array_blocks[rarr];
            rlist.erase(rlist.begin() + ptrdiff_t(ridx));
        }
        mini_block const& lb = m_blocks[l];
        uint32_t larr = lb.array;
        uint32_t loff = lb.offset;
        for (uint64_t i = keep; i < comb.size(); ++i)
            m_arrays[larr].insert(loff + i, low_of(comb[i]));
        uint64_t lidx = list_index(larr, l);
        shift_offsets_after(larr, lidx, int64_t(comb.size() - keep));
        if (comb.size() <= 2 * m_params.cap_mini) {
            rewrite_block(l, comb);
            m_store.free_block(m_blocks[rgt].store_id);
            m_free_blocks.push_back(rgt);
            lf.items.erase(lf.items.begin() + lslot + 1);
            recompute_psums(leaf);
            fix_underflow(path);
        } else {
            uint64_t half = comb.size() / 2;
            rewrite_block(l, {comb.data(), half});
            mini_block& rb = m_blocks[rgt];
            rb.count = uint32_t(comb.size() - half);
            rb.array = larr;
            rb.offset = loff + uint32_t(half);
            rb.base_bucket = high_of(comb[half]);
            m_store.realloc_block(rb.store_id, h_len({comb.data() + half, comb.size() - half}));
            write_h(rb.store_id, {comb.data() + half, comb.size() - half}, rb.base_bucket);
            auto& llist = m_array_blocks[larr];
            llist.insert(llist.begin() + ptrdiff_t(lidx) + 1, rgt);
            recompute_psums(leaf);
        }
    }

    // Splits nodes upward while the fanout cap is exceeded. The path holds
    // the descent that led to the deepest touched node.
    void fix_overflow(std::vector<path_step>& path) {
        uint64_t k = path.size() - 1;
        for (;;) {
            uint32_t nid = path[k].node;
            if (m_nodes[nid].items.size() <= 4 * m_params.tau) return;
            uint64_t half = m_nodes[nid].items.size() / 2;
            uint32_t rid = new_node(m_nodes[nid].leaf);
            {
                node& nd = m_nodes[nid];
                node& rn = m_nodes[rid];
                rn.items.assign(nd.items.begin() + ptrdiff_t(half), nd.items.end());
                nd.items.resize(half);
            }
            recompute_psums(nid);
            recompute_psums(rid);
            if (k == 0) {
                uint32_t root = new_node(false);
                m_nodes[root].items = {nid, rid};
                recompute_psums(root);
                m_root = root;
                return;
            }
            uint32_t par = path[k - 1].node;
            uint32_t pos = path[k - 1].child;
            node& pn = m_nodes[par];
            pn.items.insert(pn.items.begin() + pos + 1, rid);
            recompute_psums(par);
            --k;
        }
    }

    // Rebalances nodes upward after a child was removed: borrow one child
    // from a sibling when it has spares, merge with it otherwise. A root
    // left with a single internal child collapses one level.
    void fix_underflow(std::vector<path_step>& path) {
        uint64_t k = path.size() - 1;
        for (;;) {
            uint32_t nid = path[k].node;
            if (k == 0) {
                node& rt = m_nodes[nid];
                if (!rt.leaf && rt.items.size() == 1) {
                    uint32_t child = rt.items[0];
                    free_node(nid);
                    m_root = child;
                }
                return;
            }
            if (m_nodes[nid].items.size() >= m_params.tau) return;
            uint32_t par = path[k - 1].node;
            uint32_t pos = path[k - 1].child;
            node& pn = m_nodes[par];
            bool right = pos + 1 < pn.items.size();
            uint32_t sib = right ? pn.items[pos + 1] : pn.items[pos - 1];
            if (m_nodes[sib].items.size() > m_params.tau) {
                node& nn = m_nodes[nid];
                node& sn = m_nodes[sib];
                if (right) {
                    nn.items.push_back(sn.items.front());
                    sn.items.erase(sn.items.begin());
                } else {
                    nn.items.insert(nn.items.begin(), sn.items.back());
                    sn.items.pop_back();
                }
                recompute_psums(nid);
                recompute_psums(sib);
                recompute_psums(par);
                return;
            }
            uint32_t l = right ? nid : sib;
            uint32_t rgt = right ? sib : nid;
            uint32_t rpos = right ? pos + 1 : pos;
            node& ln = m_nodes[l];
            node& rn = m_nodes[rgt];
            ln.items.insert(ln.items.end(), rn.items.begin(), rn.items.end());
            recompute_psums(l);
            pn.items.erase(pn.items.begin() + rpos);
            recompute_psums(par);
            free_node(rgt);
            path[k].node = l;
            if (!right) path[k - 1].child = pos - 1;
            --k;
        }
    }

    uint32_t new_node(bool leaf) {
        uint32_t id;
        if (!m_free_nodes.empty()) {
            id = m_free_nodes.back();
            m_free_nodes.pop_back();
            m_nodes[id] = node{};
        } else {
            m_nodes.emplace_back();
            id = uint32_t(m_nodes.size() - 1);
        }
        m_nodes[id].leaf = leaf;
        return id;
    }

    void free_node(uint32_t id) {
        m_nodes[id] = node{};
        m_free_nodes.push_back(id);
    }

    void collect(uint32_t nid, std::vector<uint64_t>& out) const {
        node const& nd = m_nodes[nid];
        for (uint32_t item : nd.items) {
            if (nd.leaf) decode_append(item, out);
            else collect(item, out);
        }
    }

    void bump_updates() {
        ++m_updates;
        if (m_updates >= m_params.rebuild_period) rebuild_full(std::nullopt);
    }

    void rebuild_full(std::optional<uint64_t> pending) {
        std::vector<uint64_t> all;
        all.reserve(size() + 1);
        collect(m_root, all);
        if (pending) all.insert(std::lower_bound(all.begin(), all.end(), *pending), *pending);
        build_from_sorted(all);
        ++m_rebuilds;
    }

    void build_from_sorted(std::span<uint64_t const> vals) {
        uint64_t n = vals.size();
        for (uint64_t i = 1; i < n; ++i)
            if (vals[i] <= vals[i - 1])
                throw std::invalid_argument("small_set_tree: values not strictly increasing");
        uint64_t eff_m = std::max(m_universe, n ? vals.back() : 0);
        m_mu = ceil_log2_ratio(std::max<uint64_t>(eff_m, 1), std::max<uint64_t>(n, 1));
        m_store_limit =
            std::max(m_params.max_block_bits, n + 2 * m_params.cap_mini + 256);
        m_store = block_store(m_store_limit);
        m_blocks.clear();
        m_free_blocks.clear();
        m_nodes.clear();
        m_free_nodes.clear();
        m_arrays.clear();
        m_array_blocks.assign(m_params.low_arrays, {});
        m_updates = 0;

        uint64_t cap = m_params.cap_mini;
        uint64_t nblocks = n == 0 ? 0 : std::max<uint64_t>(1, (n + cap / 2) / cap);
        // Low halves first: consecutive chunks of blocks share an array.
        uint64_t per_array = nblocks == 0 ? 0 : (n + m_params.low_arrays - 1) / m_params.low_arrays;
        {
            std::vector<uint64_t> lows;
            uint64_t base_sz = nblocks ? n / nblocks : 0;
            uint64_t extra = nblocks ? n % nblocks : 0;
            uint64_t pos = 0;
            uint32_t arr = 0;
            std::vector<uint32_t> order;
            order.reserve(nblocks);
            auto flush = [&]() {
                m_arrays.emplace_back(
                    tiered_array::from_values(lows, m_mu >= 64 ? 64 : m_mu));
                lows.clear();
            };
            for (uint64_t b = 0; b < nblocks; ++b) {
                uint64_t sz = base_sz + (b < extra ? 1 : 0);
                if (!lows.empty() && lows.size() + sz > per_array &&
                    arr + 1 < m_params.low_arrays) {
                    flush();
                    ++arr;
                }
                uint32_t off = uint32_t(lows.size());
                for (uint64_t i = 0; i < sz; ++i) lows.push_back(low_of(vals[pos + i]));
                uint32_t bid = create_block({vals.data() + pos, sz}, arr, off);
                m_array_blocks[arr].push_back(bid);
                order.push_back(bid);
                pos += sz;
            }
            flush();
            while (m_arrays.size() < m_params.low_arrays)
                m_arrays.emplace_back(m_mu >= 64 ? 64 : m_mu);
            // Leaf level, then internal levels, grouped near fanout 2*tau.
            std::vector<uint32_t> level;
            bool leaf_level = true;
            std::vector<uint32_t>& src = order;
            std::vector<uint32_t> cur = std::move(src);
            if (cur.empty()) {
                m_root = new_node(true);
                return;
            }
            for (;;) {
                uint64_t groups = (cur.size() + 2 * m_params.tau - 1) / (2 * m_params.tau);
                uint64_t gbase = cur.size() / groups;
                uint64_t gextra = cur.size() % groups;
                level.clear();
                uint64_t at = 0;
                for (uint64_t g = 0; g < groups; ++g) {
                    uint64_t gsz = gbase + (g < gextra ? 1 : 0);
                    uint32_t id = new_node(leaf_level);
                    node& nd = m_nodes[id];
                    nd.items.assign(cur.begin() + ptrdiff_t(at),
                                    cur.begin() + ptrdiff_t(at + gsz));
                    recompute_psums(id);
                    level.push_back(id);
                    at += gsz;
                }
                if (level.size() == 1) {
                    m_root = level[0];
                    return;
                }
                cur = level;
                leaf_level = false;
            }
        }
    }

    void audit_node(uint32_t nid, int64_t depth, bool root, int64_t& leaf_depth,
                    uint64_t& prev_last, bool& any, uint64_t& blocks_seen) const {
        node const& nd = m_nodes[nid];
        if (nd.items.size() > 4 * m_params.tau) fail("node fanout above the cap");
        if (root) {
            if (!nd.leaf && nd.items.size() < 2) fail("internal root below two children");
        } else if (nd.items.size() < m_params.tau) {
            fail("node fanout below tau");
        }
        if (nd.psum.size() != nd.items.size()) fail("psum length mismatch");
        uint32_t acc = 0;
        for (uint64_t j = 0; j < nd.items.size(); ++j) {
            acc += nd.leaf ? m_blocks[nd.items[j]].count : m_nodes[nd.items[j]].psum.back();
            if (nd.psum[j] != acc) fail("stale prefix count");
        }
        if (!nd.leaf) {
            for (uint32_t child : nd.items)
                audit_node(child, depth + 1, false, leaf_depth, prev_last, any, blocks_seen);
            return;
        }
        if (leaf_depth < 0) leaf_depth = depth;
        else if (leaf_depth != depth) fail("leaves at unequal depth");
        bool lone = root && nd.items.size() == 1;
        for (uint32_t bid : nd.items) {
            mini_block const& b = m_blocks[bid];
            if (b.count == 0) fail("empty mini-block");
            if (!lone && (b.count < m_params.cap_mini / 2 || b.count > 2 * m_params.cap_mini))
                fail("mini-block size out of band");
            std::vector<uint64_t> vals;
            decode_block(bid, vals);
            if (vals.size() != b.count) fail("decoded count mismatch");
            for (uint64_t i = 1; i < vals.size(); ++i)
                if (vals[i] <= vals[i - 1]) fail("block not strictly increasing");
            if (b.base_bucket != high_of(vals.front())) fail("stale base bucket");
            if (block_last(bid) != vals.back()) fail("last-key shortcut disagrees");
            if (any && vals.front() <= prev_last) fail("blocks out of order");
            prev_last = vals.back();
            any = true;
            ++blocks_seen;
        }
    }
};

}  // namespace dynef
