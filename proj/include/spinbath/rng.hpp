#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace spinbath {

/// Philox4x32-10 counter-based block function (Salmon et al., SC'11).
/// Pure function of (counter, key); no internal state.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    [[nodiscard]] static constexpr Counter block(Counter ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += 0x9E3779B9u;
                key[1] += 0xBB67AE85u;
            }
            std::uint64_t const p0 = std::uint64_t{0xD2511F53u} * ctr[0];
            std::uint64_t const p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
            auto const hi0 = static_cast<std::uint32_t>(p0 >> 32);
            auto const lo0 = static_cast<std::uint32_t>(p0);
            auto const hi1 = static_cast<std::uint32_t>(p1 >> 32);
            auto const lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }
};

/// Independent random stream identified by (seed, stream). Draw i of the
/// stream is a pure function of (seed, stream, i), so streams can be consumed
/// on any thread in any order with identical results.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream) {}

    [[nodiscard]] std::uint64_t next_u64() noexcept {
        if (cached_ == 0) {
            Philox4x32::Counter const ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                          static_cast<std::uint32_t>(stream_),
                                          static_cast<std::uint32_t>(stream_ >> 32)};
            buffer_ = Philox4x32::block(ctr, key_);
            ++block_;
            cached_ = 2;
        }
        std::size_t const i = 2 - cached_;
        --cached_;
        return (std::uint64_t{buffer_[2 * i]} << 32) | buffer_[2 * i + 1];
    }

    /// Uniform on [0, 1) with 53 random bits.
    [[nodiscard]] double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    [[nodiscard]] double uniform_open0() noexcept { return 1.0 - uniform(); }

    [[nodiscard]] double exponential(double rate) noexcept { return -std::log(uniform_open0()) / rate; }

    [[nodiscard]] int sign() noexcept { return (next_u64() >> 63) != 0 ? 1 : -1; }

    /// Standard normal via Box-Muller (one value per call).
    [[nodiscard]] double normal() noexcept {
        double const r = std::sqrt(-2.0 * std::log(uniform_open0()));
        return r * std::cos(2.0 * std::numbers::pi * uniform());
    }

private:
    Philox4x32::Key key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    Philox4x32::Counter buffer_{};
    int cached_ = 0;
};

}  // namespace spinbath
