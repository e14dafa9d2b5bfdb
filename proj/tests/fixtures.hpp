#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

// The 12-element reference set used across the suite. With universe bound 63
// it encodes with 3 low bits; the high bitmap has bits at
// {0,1,2,4,5,6,8,10,12,13,16,18}, i.e. word value 341367 over 20 bits.
inline std::vector<uint64_t> const kRefSet = {3, 4, 7, 13, 14, 15, 21, 25, 36, 38, 54, 62};
inline constexpr uint64_t kRefUniverse = 63;
inline constexpr uint64_t kRefHighWord = 341367;
inline std::vector<uint64_t> const kRefHighOnes = {0, 1, 2, 4, 5, 6, 8, 10, 12, 13, 16, 18};
inline std::vector<uint64_t> const kRefLows = {3, 4, 7, 5, 6, 7, 5, 1, 4, 6, 6, 6};

inline uint64_t below(std::mt19937_64& rng, uint64_t k) {
    // Unbiased-enough bounded draw that does not depend on the
    // implementation-defined std::uniform_int_distribution.
    return k == 0 ? 0 : uint64_t((unsigned __int128)(rng()) * k >> 64);
}

// n distinct sorted values from [0, m]. Pre: n <= m + 1.
inline std::vector<uint64_t> random_sorted_set(std::mt19937_64& rng, uint64_t n, uint64_t m) {
    if (m != UINT64_MAX && n > m + 1) throw std::invalid_argument("random_sorted_set: n > m + 1");
    std::vector<uint64_t> v;
    if (m <= 4 * n + 64 && m != UINT64_MAX) {
        // Dense regime: partial shuffle of the whole universe.
        std::vector<uint64_t> all(m + 1);
        for (uint64_t i = 0; i <= m; ++i) all[i] = i;
        for (uint64_t i = 0; i != n; ++i) std::swap(all[i], all[i + below(rng, m + 1 - i)]);
        v.assign(all.begin(), all.begin() + ptrdiff_t(n));
    } else {
        // Sparse regime: oversampled draws converge geometrically.
        while (v.size() < n) {
            uint64_t need = (n - v.size()) * 2 + 16;
            for (uint64_t i = 0; i != need; ++i) v.push_back(below(rng, m + 1));
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        }
        std::vector<uint64_t> keep(v.begin(), v.end());
        for (uint64_t i = 0; i != n; ++i) std::swap(keep[i], keep[i + below(rng, keep.size() - i)]);
        keep.resize(n);
        v = std::move(keep);
    }
    std::sort(v.begin(), v.end());
    return v;
}
