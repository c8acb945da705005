#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace cadzow::bench
{

///
/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
/// A (key, counter) pair maps to four 32-bit words with no hidden state, so
/// replication r of seed s can be regenerated independently of every other.
///
class Philox4x32
{
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key   = std::array<std::uint32_t, 2>;

    explicit constexpr Philox4x32(Key key) noexcept : key_(key) {}

    constexpr Block operator()(Block ctr) const noexcept
    {
        Key key = key_;
        for (int round = 0; round < 10; ++round) {
            ctr = single_round(ctr, key);
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0  = 0xD2511F53u;
    static constexpr std::uint32_t kMul1  = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static constexpr Block single_round(const Block& ctr, const Key& key) noexcept
    {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        return Block{hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }

    Key key_;
};

///
/// Standard normal draws for one substream of a seeded experiment.
/// Counter layout: {block, stream_lo, stream_hi, 0}; each block yields two
/// normals by Box-Muller, so the sequence is fully specified here rather than
/// by a platform's std::normal_distribution.
///
class NormalStream
{
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream) noexcept
        : philox_({static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}),
          stream_lo_(static_cast<std::uint32_t>(stream)), stream_hi_(static_cast<std::uint32_t>(stream >> 32))
    {
    }

    double operator()() noexcept
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const auto words = philox_({block_++, stream_lo_, stream_hi_, 0u});
        // u1 in (0, 1], u2 in [0, 1).
        const double u1     = 1.0 - to_unit(words[0], words[1]);
        const double u2     = to_unit(words[2], words[3]);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle  = 2.0 * std::numbers::pi * u2;
        spare_              = radius * std::sin(angle);
        has_spare_          = true;
        return radius * std::cos(angle);
    }

    /// 53-bit uniform in [0, 1).
    static constexpr double to_unit(std::uint32_t hi, std::uint32_t lo) noexcept
    {
        const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
        return static_cast<double>(bits) * 0x1.0p-53;
    }

private:
    Philox4x32 philox_;
    std::uint32_t stream_lo_;
    std::uint32_t stream_hi_;
    std::uint32_t block_ = 0;
    double spare_        = 0.0;
    bool has_spare_      = false;
};

} // namespace cadzow::bench
