#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace tripert {

/// SplitMix64 finalizer. Used both as a seed expander and as the hash
/// behind counter-based stream derivation.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derive the seed of stream `(tag, index)` from a master seed.
///
/// The derivation is a pure function of its three arguments, so replica k of
/// command c always sees the same stream no matter how many commands ran
/// before it or how replicas are scheduled across workers.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                                    std::uint64_t index) noexcept {
    std::uint64_t h = splitmix64(master ^ 0x6A09E667F3BCC909ULL);
    h = splitmix64(h ^ splitmix64(tag + 0xBB67AE8584CAA73BULL));
    h = splitmix64(h ^ splitmix64(index + 0x3C6EF372FE94F82BULL));
    return h;
}

/// Hash a short ASCII label into a stream tag.
constexpr std::uint64_t stream_tag(const char* label) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
    for (; *label != '\0'; ++label) {
        h ^= static_cast<unsigned char>(*label);
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// xoshiro256** engine seeded through SplitMix64. Satisfies
/// UniformRandomBitGenerator so it plugs into <random> distributions.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed) noexcept {
        std::uint64_t x = seed;
        for (auto& word : s_) {
            x += 0x9E3779B97F4A7C15ULL;
            word = splitmix64(x);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

/// Explicit per-task random stream. There is no global generator anywhere in
/// the library; every sampling routine takes one of these by reference.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    static RandomStream for_replica(std::uint64_t master, std::uint64_t tag,
                                    std::uint64_t index) {
        return RandomStream(derive_seed(master, tag, index));
    }

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() { return normal_(engine_); }
    double normal(double mean, double sd) { return mean + sd * normal_(engine_); }
    double exponential(double rate) { return -std::log(uniform()) / rate; }
    /// +1 or -1 with equal probability.
    double sign() noexcept { return (engine_() >> 63) != 0 ? 1.0 : -1.0; }

    Xoshiro256& engine() noexcept { return engine_; }

private:
    Xoshiro256 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace tripert
