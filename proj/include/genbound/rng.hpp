#pragma once

// Counter-based random numbers.
//
// Algorithm (version-stable, part of the output contract):
//   * block(seed, stream, substream, i) = Philox4x64-10 with
//     key = (seed, stream) and counter = (i, substream, 0, 0).
//   * A stream yields the four 64-bit words of block 0, then block 1, ...
//   * uniform01      = (word >> 11) * 2^-53, in [0, 1).
//   * uniform_index  = first word u with u >= (2^64 mod n), mapped to u % n.
//   * normal         = Box-Muller on (1 - uniform01, uniform01); both outputs
//                      are used, cosine branch first.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

#include "genbound/error.hpp"

namespace genbound {

/// Stream identifiers. Each consumer of randomness owns one.
enum class Stream : std::uint64_t {
    init = 0,
    sampler = 1,
    surrogate_noise = 2,
    flatness_t2pm = 3,
    flatness_t1pm = 4,
    hutchinson = 5,
    synthetic_data = 6,
    subset = 7,
    probe = 8,
    test_support = 100,
};

namespace detail {

inline void mulhilo64(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
    const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
}

}  // namespace detail

using PhiloxBlock = std::array<std::uint64_t, 4>;

inline PhiloxBlock philox4x64_10(PhiloxBlock ctr, std::array<std::uint64_t, 2> key) {
    constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
    constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
    constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
    constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;
    for (int round = 0; round < 10; ++round) {
        std::uint64_t hi0, lo0, hi1, lo1;
        detail::mulhilo64(kMul0, ctr[0], hi0, lo0);
        detail::mulhilo64(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

/// Sequential view of one (seed, stream, substream) counter space.
/// Cheap to construct; copying forks the position.
class RngStream {
   public:
    RngStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0)
        : key_{seed, stream}, substream_(substream) {}
    RngStream(std::uint64_t seed, Stream stream, std::uint64_t substream = 0)
        : RngStream(seed, static_cast<std::uint64_t>(stream), substream) {}

    std::uint64_t seed() const noexcept { return key_[0]; }
    std::uint64_t stream() const noexcept { return key_[1]; }
    std::uint64_t substream() const noexcept { return substream_; }

    /// Independent stream sharing this stream's key, at another substream.
    RngStream fork(std::uint64_t substream) const { return RngStream(key_[0], key_[1], substream); }

    std::uint64_t next_u64() {
        if (pos_ == 4) {
            buffer_ = philox4x64_10({block_, substream_, 0, 0}, key_);
            ++block_;
            pos_ = 0;
        }
        return buffer_[pos_++];
    }

    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    std::uint64_t uniform_index(std::uint64_t n) {
        if (n == 0) throw DomainError("uniform_index: n must be positive");
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t u = next_u64();
            if (u >= threshold) return u % n;
        }
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01();
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    void fill_normal(std::span<double> out) {
        for (double& x : out) x = normal();
    }

   private:
    std::array<std::uint64_t, 2> key_;
    std::uint64_t substream_;
    std::uint64_t block_ = 0;
    PhiloxBlock buffer_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace genbound
