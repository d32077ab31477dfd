#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace resched {

// Mixes two 64-bit values into a fresh seed (splitmix64 finalizer). Used to
// derive independent substreams, e.g. "sample i of run seeded s", so that the
// i-th sample is the same no matter how many samples surround it.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic RNG used throughout the engine. std::mt19937_64 is specified
// bit-exactly by the standard, but the standard distributions are not, so the
// integer/real mappings are done by hand: seeded runs must reproduce across
// compilers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform integer in [lo, hi], both inclusive. Rejection sampling: no
    // modulo bias, and the draw count is data-independent enough for our use
    // (every consumer documents its call order through code alone).
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = std::uint64_t(hi) - std::uint64_t(lo) + 1;
        const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % span);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return lo + int(x % span);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // Draws an index from a probability vector (entries >= 0, summing to ~1).
    // Rounding slack falls onto the last index.
    std::size_t categorical(std::span<const double> probs) {
        const double u = uniform01();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return i;
        }
        return probs.empty() ? 0 : probs.size() - 1;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace resched
