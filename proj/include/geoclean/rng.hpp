#pragma once

// Deterministic random number generation. Every randomized step in the
// pipeline draws from this wrapper rather than from the standard library
// distributions, because libstdc++ does not pin down the bit streams of
// std::uniform_int_distribution or std::shuffle. The raw mt19937_64
// engine output IS pinned by the standard, so building draws from engine
// words directly gives identical sequences on any conforming platform.

#include <cstdint>
#include <random>
#include <vector>

#include "geoclean/common.hpp"

namespace geoclean {

class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t bits() { return engine_(); }

    // Unbiased draw in [0, n) by rejection sampling the top of the range.
    uint64_t below(uint64_t n) {
        if (n == 0) return 0;
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v = engine_();
        while (v >= limit) v = engine_();
        return v % n;
    }

    // Uniform in [lo, hi] inclusive.
    int64_t range(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo) + 1));
    }

    // Uniform in [0, 1) with 53 bits of resolution, matching the usual
    // double-from-integer construction.
    double unit() { return static_cast<double>(engine_() >> 11) * (1.0 / 9007199254740992.0); }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    // Fisher-Yates, spelled out so the swap sequence is fixed by this code
    // rather than by a library implementation.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices drawn from [0, n), in selection order.
    std::vector<size_t> sample_indices(size_t n, size_t k) {
        if (k > n) k = n;
        std::vector<size_t> pool(n);
        for (size_t i = 0; i < n; ++i) pool[i] = i;
        for (size_t i = 0; i < k; ++i) {
            size_t j = i + static_cast<size_t>(below(n - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        return pool;
    }

private:
    std::mt19937_64 engine_;
};

// Stable derivation of per-task seeds from a base seed and a textual salt,
// so independent sub-corpora get independent streams that do not shift
// when unrelated sub-corpora are added or removed.
inline uint64_t mix_seed(uint64_t base, std::string_view salt) {
    uint64_t h = fnv1a64(base);
    h = fnv1a64(salt, h);
    return h;
}

}  // namespace geoclean
