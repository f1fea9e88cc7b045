#pragma once

// Counter-based random numbers. Every trajectory owns a stream identified by
// (seed, purpose, index); draws depend only on that triple and the draw counter,
// so results do not depend on scheduling or worker count.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>
#include <utility>

namespace flatlyap {

/// Philox4x32 with 10 rounds (Salmon et al. counter-based generator).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter block(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            ctr = single_round(ctr, key);
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        return ctr;
    }

private:
    static constexpr std::pair<std::uint32_t, std::uint32_t> mulhilo(std::uint32_t a, std::uint32_t b) noexcept {
        const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
        return {static_cast<std::uint32_t>(p >> 32), static_cast<std::uint32_t>(p)};
    }

    static constexpr Counter single_round(const Counter& x, const Key& k) noexcept {
        const auto [hi0, lo0] = mulhilo(0xD2511F53u, x[0]);
        const auto [hi1, lo1] = mulhilo(0xCD9E8D57u, x[2]);
        return {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
    }
};

/// SplitMix64 finalizer; used to fold stream labels into 64-bit ids.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

/// Stream identifier for trajectory `index` of the ensemble labelled `purpose`.
constexpr std::uint64_t stream_id(std::string_view purpose, std::uint64_t index) noexcept {
    return mix64(fnv1a64(purpose) ^ mix64(index));
}

/// One independent random stream. Satisfies UniformRandomBitGenerator.
class RandomStream {
public:
    using result_type = std::uint32_t;

    RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    RandomStream(std::uint64_t seed, std::string_view purpose, std::uint64_t index) noexcept
        : RandomStream(seed, stream_id(purpose, index)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (used_ == 4) refill();
        return buffer_[used_++];
    }

    /// Uniform double in the open interval (0, 1) with 53 random bits.
    double uniform() noexcept {
        const std::uint64_t hi = (*this)();
        const std::uint64_t lo = (*this)();
        const std::uint64_t bits = ((hi << 32) | lo) >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    /// Two independent standard normals (Box-Muller).
    std::pair<double, double> normal_pair() noexcept {
        const double u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

    double normal() noexcept { return normal_pair().first; }

    std::uint64_t stream() const noexcept { return stream_; }
    std::uint64_t draws() const noexcept { return counter_; }

private:
    void refill() noexcept {
        const Philox4x32::Counter ctr{static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                                      static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        buffer_ = Philox4x32::block(ctr, key_);
        ++counter_;
        used_ = 0;
    }

    Philox4x32::Key key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    Philox4x32::Counter buffer_{};
    int used_ = 4;
};

}  // namespace flatlyap
