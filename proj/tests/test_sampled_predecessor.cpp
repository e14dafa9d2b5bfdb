#include <doctest.h>

#include <dynef/sampled_predecessor.hpp>

#include "fixtures.hpp"

using namespace dynef;

TEST_CASE("reference heads every fourth rank") {
    auto sp = sampled_predecessor::build(kRefSet, kRefUniverse, 4);
    REQUIRE(sp.heads() == std::vector<uint64_t>{3, 14, 36});
    REQUIRE(sp.predecessor(30) == 25);
    REQUIRE(sp.predecessor(36) == 25);
    REQUIRE(sp.predecessor(37) == 36);
    REQUIRE(!sp.predecessor(3).has_value());
    REQUIRE(!sp.predecessor(0).has_value());
    REQUIRE(sp.predecessor(1000) == 62);
    REQUIRE(sp.access(8) == 36);
}

TEST_CASE("tiny sets keep a single head") {
    std::vector<uint64_t> values = {9, 11, 40};
    auto sp = sampled_predecessor::build(values, 63, 4);
    REQUIRE(sp.heads() == std::vector<uint64_t>{9});
    REQUIRE(sp.predecessor(41) == 40);
    REQUIRE(sp.predecessor(10) == 9);
    REQUIRE(!sp.predecessor(9).has_value());
}

TEST_CASE("block length below two is rejected") {
    REQUIRE_THROWS_AS(sampled_predecessor::build(kRefSet, kRefUniverse, 1),
                      std::invalid_argument);
}

TEST_CASE("matches the plain sequence predecessor") {
    std::mt19937_64 rng(61);
    uint64_t const m = uint64_t(1) << 30;
    auto values = random_sorted_set(rng, 5000, m);
    auto ef = elias_fano::encode(values, m);
    auto sp = sampled_predecessor(elias_fano::encode(values, m), 8);
    for (int q = 0; q != 10000; ++q) {
        uint64_t x = below(rng, m + 1);
        REQUIRE(sp.predecessor(x) == ef.predecessor(x));
    }
    REQUIRE(sp.payload_bits() == ef.payload_bits());
    REQUIRE(sp.router_bits() > 0);
}

TEST_CASE("exhaustive on a small universe") {
    std::mt19937_64 rng(67);
    for (uint64_t block_len : {2, 4, 16}) {
        uint64_t const m = 300;
        auto values = random_sorted_set(rng, 60, m);
        auto sp = sampled_predecessor::build(values, m, block_len);
        for (uint64_t x = 0; x <= m; ++x) {
            auto it = std::lower_bound(values.begin(), values.end(), x);
            if (it == values.begin()) {
                REQUIRE(!sp.predecessor(x).has_value());
            } else {
                REQUIRE(sp.predecessor(x) == *(it - 1));
            }
        }
    }
}
