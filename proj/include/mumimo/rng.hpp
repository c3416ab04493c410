// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace mumimo {

/// SplitMix64 finalizer, used to turn structured keys into well-mixed seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive a child key from a parent key and a counter. Streams keyed this way are
/// independent of evaluation order, so work can be split across threads freely.
constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t counter) noexcept {
    return mix64(mix64(parent) ^ (counter * 0xd1b54a32d192ed03ULL + 0x2545f4914f6cdd1dULL));
}

/// xoshiro256** engine with a cached standard-normal generator.
///
/// One stream per unit of work (trial, drop, terminal); never shared between threads.
class RandomStream {
  public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t key) noexcept {
        std::uint64_t s = key;
        for (auto& word : state_) {
            s += 0x9e3779b97f4a7c15ULL;
            word = mix64(s);
        }
    }

    /// Substream addressed by (master seed, domain, index).
    static RandomStream substream(std::uint64_t seed, std::uint64_t domain, std::uint64_t index = 0) noexcept {
        return RandomStream(derive_key(derive_key(seed, domain), index));
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double normal() { return normal_(*this); }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace mumimo
