#pragma once

// Counter-based random numbers.
//
// Generator: Philox4x32-10 (Salmon et al., SC'11), "piwo-philox4x32-10/v1".
//   key     = 64-bit seed split into two 32-bit words (lo, hi)
//   counter = (draw index lo, draw index hi, stream lo, stream hi)
// Each block yields four 32-bit words. A uniform double in [0,1) is built
// from two consecutive words as (hi >> 5) * 2^26 + (lo >> 6), scaled by
// 2^-53. Normals use the Box-Muller transform on two uniforms, discarding
// the second variate. Streams are independent: distinct (seed, stream)
// pairs never share counter values.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <span>

namespace piwo {

class Philox {
public:
    using result_type = std::uint32_t;

    explicit Philox(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return 0xffffffffu; }

    result_type operator()() noexcept {
        if (pos_ == 4) {
            refill();
        }
        return block_[pos_++];
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept {
        const std::uint64_t hi = (*this)() >> 5;
        const std::uint64_t lo = (*this)() >> 6;
        return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
    }

    double normal() noexcept {
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Inverse-CDF draw from a probability row, scanning in index order.
    /// Never returns an index whose probability is zero.
    std::size_t categorical(std::span<const double> probs) noexcept {
        const double u = uniform();
        double acc = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (probs[i] <= 0.0) {
                continue;
            }
            last_positive = i;
            acc += probs[i];
            if (u < acc) {
                return i;
            }
        }
        // Rounding left acc slightly below 1.
        return last_positive;
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

private:
    void refill() noexcept {
        std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(counter_),
                                         static_cast<std::uint32_t>(counter_ >> 32),
                                         static_cast<std::uint32_t>(stream_),
                                         static_cast<std::uint32_t>(stream_ >> 32)};
        std::array<std::uint32_t, 2> key = key_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        block_ = ctr;
        pos_ = 0;
        ++counter_;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int pos_ = 4;
};

/// Mixes several coordinates into one stream id (splitmix64 finalizer chain).
inline std::uint64_t stream_id(std::initializer_list<std::uint64_t> coords) noexcept {
    std::uint64_t h = 0x6A09E667F3BCC909ull;
    for (std::uint64_t c : coords) {
        h ^= c + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
        h ^= h >> 30;
        h *= 0xBF58476D1CE4E5B9ull;
        h ^= h >> 27;
        h *= 0x94D049BB133111EBull;
        h ^= h >> 31;
    }
    return h;
}

}  // namespace piwo
