#include <doctest.h>

#include <dynef/space.hpp>

#include "fixtures.hpp"

using namespace dynef;

namespace {

// Independent small-case binomial, good while C(m+1, n) fits 128 bits.
unsigned __int128 small_binomial(uint64_t u, uint64_t n) {
    if (n > u) return 0;
    n = std::min(n, u - n);
    unsigned __int128 c = 1;
    for (uint64_t i = 1; i <= n; ++i) c = c * (u - n + i) / i;
    return c;
}

uint64_t small_ceil_log2(unsigned __int128 v) {
    uint64_t bits = 0;
    unsigned __int128 w = v;
    while (w > 1) {
        w >>= 1;
        ++bits;
    }
    return ((unsigned __int128)(1) << bits) == v ? bits : bits + 1;
}

}  // namespace

TEST_CASE("ef_bits fixed points") {
    REQUIRE(ef_bits(12, 63) == 56);
    REQUIRE(ef_bits(6, 15) == 22);
    REQUIRE(ef_bits(6, 48) == 30);
    REQUIRE(ef_bits(1, 1) == 2);
    REQUIRE(ef_bits(0, 100) == 0);
}

TEST_CASE("ef_bits obeys the coarse bound") {
    std::mt19937_64 rng(5);
    for (int t = 0; t != 5000; ++t) {
        uint64_t n = 1 + below(rng, 10000);
        uint64_t m = n + below(rng, uint64_t(1) << (1 + below(rng, 40)));
        REQUIRE(ef_bits(n, m) <= n * ceil_log2_ratio(m, n) + 2 * n);
    }
}

TEST_CASE("b_bits fixed points and universe convention") {
    REQUIRE(b_bits(12, 63) == 42);  // ceil(log2 C(64, 12)), C = 3284214703056
    REQUIRE(b_bits(1, 1) == 1);     // C(2, 1) = 2: the inclusive universe has two subsets of size 1
    REQUIRE(b_bits(0, 99) == 0);
    REQUIRE(b_bits(5, 4) == 0);     // full universe, one subset
}

TEST_CASE("b_bits equals an independent exact computation on small cases") {
    for (uint64_t m = 0; m <= 40; ++m) {
        for (uint64_t n = 0; n <= m + 1; ++n) {
            auto c = small_binomial(m + 1, n);
            uint64_t expect = c <= 1 ? 0 : small_ceil_log2(c);
            REQUIRE(b_bits(n, m) == expect);
        }
    }
}

TEST_CASE("log-gamma path agrees with exact arithmetic") {
    for (auto [n, m] : std::vector<std::pair<uint64_t, uint64_t>>{
             {1000, uint64_t(1) << 30},
             {4096, uint64_t(1) << 40},
             {3, uint64_t(1) << 52},
             {10000, (uint64_t(1) << 21) + 77}}) {
        REQUIRE(b_bits(n, m) == detail::b_bits_exact(n, m));
    }
}

TEST_CASE("b_bits never exceeds ef_bits by more than the additive term") {
    std::mt19937_64 rng(55);
    for (int t = 0; t != 300; ++t) {
        uint64_t n = 1 + below(rng, 2000);
        uint64_t m = n + below(rng, uint64_t(1) << (4 + below(rng, 36)));
        REQUIRE(b_bits(n, m) <= ef_bits(n, m) + 2 * n);
    }
}

TEST_CASE("space report wiring") {
    auto r = space_report::make(12, 63, 56);
    REQUIRE(r.ef_bits == 56);
    REQUIRE(r.b_bits == 42);
    REQUIRE(r.measured_bits == 56);
    REQUIRE(r.redundancy_bits == 14);
}
