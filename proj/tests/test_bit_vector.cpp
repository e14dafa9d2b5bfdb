#include <doctest.h>

#include <dynef/bit_vector.hpp>

#include "fixtures.hpp"

using namespace dynef;

namespace {

bit_vector ref_high() {
    bit_vector bv(20);
    for (uint64_t p : kRefHighOnes) bv.set_bit(p);
    bv.build_index();
    return bv;
}

}  // namespace

TEST_CASE("reference bitmap construction") {
    auto bv = ref_high();
    REQUIRE(bv.size() == 20);
    REQUIRE(bv.ones() == 12);
    REQUIRE(bv.zeros() == 8);
    REQUIRE((bv.words()[0] & ((uint64_t(1) << 20) - 1)) == kRefHighWord);
    for (uint64_t p = 0; p != 20; ++p) {
        bool expect = std::find(kRefHighOnes.begin(), kRefHighOnes.end(), p) != kRefHighOnes.end();
        REQUIRE(bv.bit(p) == expect);
    }
}

TEST_CASE("reference bitmap rank and select") {
    auto bv = ref_high();
    REQUIRE(bv.rank1(0) == 0);
    REQUIRE(bv.rank1(13) == 9);
    REQUIRE(bv.rank1(20) == 12);
    REQUIRE(bv.rank0(20) == 8);
    REQUIRE(bv.select1(8) == 12);
    REQUIRE(bv.select1(11) == 18);
    REQUIRE(bv.select0(0) == 3);
    REQUIRE(bv.select0(2) == 9);
    REQUIRE(bv.select0(7) == 19);
}

TEST_CASE("rank plus complement equals position") {
    std::mt19937_64 rng(7);
    bit_vector bv(4097);
    for (int i = 0; i != 900; ++i) bv.set_bit(below(rng, 4097));
    bv.build_index();
    for (uint64_t pos = 0; pos <= bv.size(); ++pos) REQUIRE(bv.rank1(pos) + bv.rank0(pos) == pos);
}

TEST_CASE("rank and select against a linear scan") {
    std::mt19937_64 rng(42);
    for (uint64_t density : {1, 13, 50, 87, 99}) {
        uint64_t const len = 100000;
        bit_vector bv(len);
        std::vector<bool> oracle(len, false);
        for (uint64_t i = 0; i != len; ++i) {
            if (below(rng, 100) < density) {
                bv.set_bit(i);
                oracle[i] = true;
            }
        }
        bv.build_index();
        uint64_t ones = 0;
        std::vector<uint64_t> one_pos, zero_pos;
        for (uint64_t i = 0; i != len; ++i) {
            if (i % 97 == 0) REQUIRE(bv.rank1(i) == ones);
            if (oracle[i]) {
                one_pos.push_back(i);
                ++ones;
            } else {
                zero_pos.push_back(i);
            }
        }
        REQUIRE(bv.ones() == ones);
        for (uint64_t j = 0; j < one_pos.size(); j += 31) REQUIRE(bv.select1(j) == one_pos[j]);
        for (uint64_t j = 0; j < zero_pos.size(); j += 31) REQUIRE(bv.select0(j) == zero_pos[j]);
        REQUIRE(bv.select1(one_pos.size() - 1) == one_pos.back());
        REQUIRE(bv.select0(zero_pos.size() - 1) == zero_pos.back());
    }
}

TEST_CASE("select samples sit on exact sampled occurrences") {
    std::mt19937_64 rng(3);
    uint64_t const len = 200000;
    bit_vector bv(len);
    std::vector<uint64_t> one_pos;
    for (uint64_t i = 0; i != len; ++i) {
        if (below(rng, 100) < 40) bv.set_bit(i);
    }
    bv.build_index();
    for (uint64_t i = 0; i != len; ++i)
        if (bv.bit(i)) one_pos.push_back(i);
    auto const& samples = bv.select_samples1();
    REQUIRE(samples.size() == (one_pos.size() + bit_vector::select_rate - 1) / bit_vector::select_rate);
    for (uint64_t j = 0; j != samples.size(); ++j) REQUIRE(samples[j] == one_pos[j * bit_vector::select_rate]);
}

TEST_CASE("mutation invalidates the index") {
    auto bv = ref_high();
    REQUIRE(bv.index_current());
    bv.set_bit(3);
    REQUIRE(!bv.index_current());
    REQUIRE_THROWS_AS(bv.rank1(5), std::logic_error);
    REQUIRE_THROWS_AS(bv.select1(0), std::logic_error);
    bv.build_index();
    REQUIRE(bv.rank1(20) == 13);
    // Setting an already-set bit is not a mutation.
    bv.set_bit(3);
    REQUIRE(bv.index_current());
}

TEST_CASE("query bounds") {
    auto bv = ref_high();
    REQUIRE_THROWS_AS(bv.bit(20), std::out_of_range);
    REQUIRE_THROWS_AS(bv.set_bit(20), std::out_of_range);
    REQUIRE_THROWS_AS(bv.rank1(21), std::out_of_range);
    REQUIRE_THROWS_AS(bv.select1(12), std::out_of_range);
    REQUIRE_THROWS_AS(bv.select0(8), std::out_of_range);
}

TEST_CASE("bitmap serialization round trip") {
    auto bv = ref_high();
    byte_writer out;
    bv.serialize(out);
    byte_reader in(out.bytes);
    auto loaded = bit_vector::load(in);
    REQUIRE(in.exhausted());
    REQUIRE(loaded == bv);
    byte_writer again;
    loaded.serialize(again);
    REQUIRE(again.bytes == out.bytes);

    auto corrupted = out.bytes;
    corrupted[corrupted.size() - 1] ^= 0x10;  // flips a padding-area bit of the word payload
    byte_reader bad(corrupted);
    REQUIRE_THROWS_AS(bit_vector::load(bad), std::runtime_error);
}

TEST_CASE("empty and degenerate vectors") {
    bit_vector empty(0);
    empty.build_index();
    REQUIRE(empty.rank1(0) == 0);
    bit_vector one(1);
    one.set_bit(0);
    one.build_index();
    REQUIRE(one.select1(0) == 0);
    REQUIRE(one.rank1(1) == 1);
}
