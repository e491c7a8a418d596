#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace igsim {

/// SplitMix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Order-sensitive combination of integer keys into one seed.
constexpr std::uint64_t mix_seed(std::initializer_list<std::uint64_t> keys) noexcept {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (auto k : keys) h = splitmix64(h ^ splitmix64(k));
    return h;
}

/// FNV-1a over bytes; used to fold strings into seeds.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Uniform [0,1) value derived from a key without any generator state.
constexpr double unit_from_key(std::uint64_t key) noexcept {
    return static_cast<double>(splitmix64(key) >> 11) * 0x1.0p-53;
}

/// Small portable generator. Every draw is specified here (no std::
/// distributions) so sequences are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0,1).
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer on [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) noexcept;

    /// Standard normal (Marsaglia polar).
    double normal() noexcept;

    bool bernoulli(double p) noexcept { return uniform() < p; }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace igsim
