#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace lifehd {

// One master seed drives every randomized component. Sub-seeds are derived
// with splitmix64 over (master, stream tag) so that changing the master seed
// changes all streams and fixing it fixes all of them.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stream tags for sub-seed derivation (documented in the README).
enum class SeedStream : std::uint64_t {
    encoder_tables = 1,
    stream_order = 2,
    merge_kmeans = 3,
    label_flags = 4,
    test_split = 5,
    synthetic_data = 6,
    drift = 7,
};

inline std::uint64_t derive_seed(std::uint64_t master, SeedStream stream) {
    return splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(stream)));
}

// mt19937_64 has a pinned algorithm in the standard; the distribution
// helpers below are hand-rolled because std distributions are not.
using Rng = std::mt19937_64;

// Unbiased draw from [0, n) via rejection sampling.
inline std::uint64_t bounded(Rng& rng, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("bounded: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::int8_t random_bipolar(Rng& rng) {
    return (rng() & 1ULL) ? std::int8_t{1} : std::int8_t{-1};
}

template <typename T>
void shuffle_in_place(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(bounded(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

// k distinct indices from [0, n), in selection order (partial Fisher-Yates).
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
    if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(bounded(rng, n - i));
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
    }
    return out;
}

} // namespace lifehd
