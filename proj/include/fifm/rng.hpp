#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace fifm {

/// splitmix64 finalizer, used to mix (seed, stream, block) keys into engine
/// seeds so that every block of randomness is independently addressable.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Keyed RNG: a deterministic function of (seed, stream, block). The engine
/// is xoshiro256** seeded through splitmix64, cheap enough to instantiate
/// per block; samplers use inversion so results depend only on the engine.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream, std::int64_t block) {
        std::uint64_t key = mix64(mix64(mix64(seed) ^ stream) ^
                                  static_cast<std::uint64_t>(block));
        for (auto& word : state_) {
            key += 0x9e3779b97f4a7c15ull;
            std::uint64_t z = key;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t next_u64() {
        auto rotl = [](std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
        std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on (0, 1).
    double uniform() {
        double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return u > 0.0 ? u : 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Exponential with the given rate; +inf when the rate is zero.
    double exponential(double rate) {
        if (rate <= 0.0) return std::numeric_limits<double>::infinity();
        return -std::log(uniform()) / rate;
    }

    bool coin() { return (next_u64() & 1ull) != 0; }

    /// Uniform index in [0, n).
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

    /// Poisson count via cumulative exponential gaps (exact, O(mean)).
    int poisson(double mean) {
        if (mean <= 0.0) return 0;
        int count = 0;
        double acc = 0.0;
        while (true) {
            acc += exponential(1.0);
            if (acc > mean) break;
            ++count;
        }
        return count;
    }

private:
    std::uint64_t state_[4];
};

} // namespace fifm
