// Seeded, platform-independent pseudo-random number generation.
//
// Algorithm: xoshiro256** (Blackman & Vigna), state initialized from a
// 64-bit seed plus a 64-bit stream id via splitmix64. Both generators are
// fully specified by their reference C implementations, so a given
// (seed, stream) pair produces the same draw sequence on every platform.
// Uniform doubles use the top 53 bits of the raw output; Gaussians use
// Box-Muller on those uniforms. None of this depends on std::*_distribution,
// whose output is implementation-defined.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "errors.hpp"

namespace bdesn {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}
}  // namespace detail

class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream) {
        // splitmix64 absorbs the seed, then the stream id, then fills the
        // four xoshiro256** state words. An all-zero state is impossible
        // because splitmix64 is a bijection over a nonzero-increment walk.
        std::uint64_t sm = seed;
        (void)detail::splitmix64(sm);
        sm ^= 0x6a09e667f3bcc909ULL ^ stream;
        for (auto& word : state_) word = detail::splitmix64(sm);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    // Independent generator for a derived purpose (weights, shuffles, ...).
    SeededRng fork(std::uint64_t substream) const {
        return SeededRng(seed_, stream_ * 0x100000001ULL + substream + 1);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl64(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl64(state_[3], 45);
        return result;
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Standard normal via Box-Muller; one spare value is cached.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 == 0.0) u1 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // Unbiased integer on [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) throw ParameterError("below(): bound must be positive");
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    // In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    // k distinct values from {0, ..., n-1}, in ascending order.
    std::vector<std::uint64_t> sample_without_replacement(std::uint64_t n, std::uint64_t k);

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t state_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

inline std::vector<std::uint64_t> SeededRng::sample_without_replacement(std::uint64_t n,
                                                                        std::uint64_t k) {
    if (k > n) throw ParameterError("sample_without_replacement(): k exceeds population");
    // Partial Fisher-Yates over the full index vector, then sort the prefix
    // so downstream consumers see a canonical order.
    std::vector<std::uint64_t> pool(n);
    for (std::uint64_t i = 0; i < n; ++i) pool[i] = i;
    for (std::uint64_t i = 0; i < k; ++i) {
        const std::uint64_t j = i + below(n - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace bdesn
