#include <doctest.h>

#include <dynef/y_fast_trie.hpp>

#include <map>
#include <string>

#include "fixtures.hpp"

using namespace dynef;

TEST_CASE("single key routes around itself") {
    y_fast_trie<std::string> t(63);
    t.insert(5, "a");
    REQUIRE(t.size() == 1);
    auto p = t.predecessor(6);
    REQUIRE(p.has_value());
    REQUIRE(p->first == 5);
    REQUIRE(p->second == "a");
    REQUIRE(!t.predecessor(5).has_value());
    REQUIRE(!t.predecessor(0).has_value());
    REQUIRE(t.pred_leq(5)->first == 5);
}

TEST_CASE("block heads route strictly") {
    y_fast_trie<uint64_t> t(63);
    t.insert(3, 0);
    t.insert(14, 1);
    t.insert(36, 2);
    REQUIRE(t.predecessor(30)->first == 14);
    REQUIRE(t.predecessor(30)->second == 1);
    REQUIRE(t.predecessor(14)->first == 3);
    REQUIRE(!t.predecessor(3).has_value());
    REQUIRE(t.predecessor(63)->first == 36);
    REQUIRE(t.pred_leq(3)->first == 3);
    REQUIRE(!t.pred_leq(2).has_value());
    REQUIRE(t.pred_leq(UINT64_MAX)->first == 36);
    REQUIRE(t.min_entry()->first == 3);
    REQUIRE(t.max_entry()->first == 36);
}

TEST_CASE("duplicate insert replaces the payload") {
    y_fast_trie<uint64_t> t(1000);
    REQUIRE(t.insert(7, 1));
    REQUIRE(!t.insert(7, 9));
    REQUIRE(t.size() == 1);
    REQUIRE(*t.find(7) == 9);
    REQUIRE(t.erase(7) == 9);
    REQUIRE(!t.erase(7).has_value());
    REQUIRE(t.empty());
}

TEST_CASE("rejects keys above the universe") {
    y_fast_trie<uint64_t> t(100);
    REQUIRE_THROWS_AS(t.insert(101, 0), std::out_of_range);
}

TEST_CASE("differential against an ordered map") {
    std::mt19937_64 rng(41);
    for (uint64_t universe : {uint64_t(1) << 12, uint64_t(1) << 40}) {
        y_fast_trie<uint64_t> t(universe);
        std::map<uint64_t, uint64_t> oracle;
        for (int op = 0; op != 6000; ++op) {
            uint64_t roll = below(rng, 100);
            if (roll < 50) {
                uint64_t k = below(rng, universe + 1);
                bool fresh = t.insert(k, uint64_t(op));
                REQUIRE(fresh == !oracle.count(k));
                oracle[k] = uint64_t(op);
            } else if (roll < 80 && !oracle.empty()) {
                auto it = oracle.begin();
                std::advance(it, ptrdiff_t(below(rng, oracle.size())));
                auto got = t.erase(it->first);
                REQUIRE(got == it->second);
                oracle.erase(it);
            } else {
                uint64_t x = below(rng, universe + 1);
                auto got = t.predecessor(x);
                auto it = oracle.lower_bound(x);
                if (it == oracle.begin()) {
                    REQUIRE(!got.has_value());
                } else {
                    --it;
                    REQUIRE(got.has_value());
                    REQUIRE(got->first == it->first);
                    REQUIRE(got->second == it->second);
                }
                uint64_t probe_key = below(rng, universe + 1);
                auto fit = oracle.find(probe_key);
                auto fgot = t.find(probe_key);
                REQUIRE(fgot.has_value() == (fit != oracle.end()));
                if (fgot) REQUIRE(*fgot == fit->second);
            }
            REQUIRE(t.size() == oracle.size());
        }
        uint64_t walked = 0;
        uint64_t prev_key = 0;
        bool first = true;
        t.for_each([&](uint64_t k, uint64_t v) {
            REQUIRE(oracle.at(k) == v);
            if (!first) REQUIRE(prev_key < k);
            prev_key = k;
            first = false;
            ++walked;
        });
        REQUIRE(walked == oracle.size());
    }
}

TEST_CASE("exhaustive predecessor agreement on a small universe") {
    std::mt19937_64 rng(43);
    uint64_t const universe = 4095;
    for (int round = 0; round != 20; ++round) {
        uint64_t n = 1 + below(rng, 200);
        auto keys = random_sorted_set(rng, n, universe);
        y_fast_trie<uint64_t> t(universe);
        for (uint64_t i = 0; i != n; ++i) t.insert(keys[i], i);
        for (uint64_t x = 0; x <= universe; ++x) {
            auto it = std::lower_bound(keys.begin(), keys.end(), x);
            auto got = t.predecessor(x);
            if (it == keys.begin()) {
                REQUIRE(!got.has_value());
            } else {
                REQUIRE(got->first == *(it - 1));
            }
        }
    }
}

TEST_CASE("tiny universe edge") {
    y_fast_trie<uint64_t> t(1);
    REQUIRE(t.key_bits() == 1);
    t.insert(0, 10);
    t.insert(1, 11);
    REQUIRE(!t.predecessor(0).has_value());
    REQUIRE(t.predecessor(1)->second == 10);
    REQUIRE(t.pred_leq(1)->second == 11);
    t.erase(0);
    REQUIRE(!t.predecessor(1).has_value());
}

TEST_CASE("prefix search stays within the probe budget") {
    std::mt19937_64 rng(47);
    for (uint64_t universe : {(uint64_t(1) << 40) - 1, UINT64_MAX}) {
        y_fast_trie<uint64_t> t(universe);
        uint64_t w = t.key_bits();
        uint64_t budget = ceil_log2(w + 1) + 3;
        for (int i = 0; i != 5000; ++i) t.insert(below(rng, universe), 0);
        for (int q = 0; q != 2000; ++q) {
            uint64_t probes = 0;
            t.predecessor(below(rng, universe + (universe != UINT64_MAX)), &probes);
            REQUIRE(probes <= budget);
        }
    }
}

TEST_CASE("bucket sizes respect the rebalancing band") {
    std::mt19937_64 rng(53);
    uint64_t const universe = (uint64_t(1) << 32) - 1;
    y_fast_trie<uint64_t> t(universe);
    uint64_t const target = t.bucket_target();
    std::vector<uint64_t> alive;
    for (int op = 0; op != 20000; ++op) {
        if (alive.empty() || below(rng, 100) < 60) {
            uint64_t k = below(rng, universe + 1);
            if (t.insert(k, 0)) alive.push_back(k);
        } else {
            uint64_t idx = below(rng, alive.size());
            t.erase(alive[idx]);
            alive[idx] = alive.back();
            alive.pop_back();
        }
        if (op % 512 == 0) {
            auto sizes = t.bucket_sizes();
            for (uint64_t s : sizes) {
                REQUIRE(s <= 2 * target);
                if (sizes.size() > 1) REQUIRE(s >= std::max<uint64_t>(1, target / 4));
            }
        }
    }
    REQUIRE(t.size() == alive.size());
}

TEST_CASE("structural space stays linear in keys") {
    std::mt19937_64 rng(59);
    uint64_t const universe = (uint64_t(1) << 32) - 1;
    y_fast_trie<uint64_t> t(universe);
    uint64_t n = 0;
    while (n < 4096) n += t.insert(below(rng, universe), n) ? 1 : 0;
    REQUIRE(t.audit_bits() <= 24 * n * t.key_bits());
}

TEST_CASE("move transfers contents") {
    y_fast_trie<uint64_t> a(1000);
    a.insert(10, 1);
    a.insert(500, 2);
    y_fast_trie<uint64_t> b(std::move(a));
    REQUIRE(b.size() == 2);
    REQUIRE(b.predecessor(501)->second == 2);
    y_fast_trie<uint64_t> c(7);
    c = std::move(b);
    REQUIRE(c.predecessor(11)->second == 1);
    c.clear();
    REQUIRE(c.empty());
    REQUIRE(!c.predecessor(1000).has_value());
    c.insert(3, 9);
    REQUIRE(c.pred_leq(3)->second == 9);
}
