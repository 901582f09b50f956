#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace adacm {

// Deterministic RNG utilities. All randomness in the library flows through
// RngStream so that runs are reproducible bit-for-bit regardless of platform
// or standard-library version (std::shuffle and std::normal_distribution are
// implementation-defined, so we roll the few primitives we need).

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Folds a tag sequence into a single substream key. Used to give every
// consumer (model init, batch shuffling, per-sample augmentation views)
// an independent stream derived from one global seed.
inline std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t k = splitmix64(seed);
    for (std::uint64_t t : tags) k = splitmix64(k ^ t);
    return k;
}

class RngStream {
public:
    RngStream() : state_(splitmix64(0)) {}
    explicit RngStream(std::uint64_t key) : state_(splitmix64(key)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, n). Rejection-free modulo is fine here: n is
    // tiny compared with 2^64 so the bias is far below any tolerance we use.
    std::uint64_t next_below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

    // Standard normal via Box-Muller (one value per call; the pair's second
    // half is discarded to keep the stream position independent of call parity).
    double gaussian() {
        double u1 = next_double();
        double u2 = next_double();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    bool bernoulli(double p) { return next_double() < p; }

    // Fisher-Yates with our own draws; deterministic across platforms.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

}  // namespace adacm
