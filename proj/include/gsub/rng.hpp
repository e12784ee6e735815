#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace gsub {

/// Philox4x32-10 counter-based generator.
///
/// The 64-bit seed is the key; the 64-bit stream id occupies the upper half of
/// the 128-bit counter. Streams with different ids never overlap, which is
/// what lets replication r of an experiment draw from stream r regardless of
/// which worker thread runs it.
class Philox {
public:
    using result_type = std::uint64_t;

    static constexpr const char* kName = "philox4x32-10";

    explicit Philox(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          counter_{0, 0, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (pos_ >= 2) refill();
        const result_type v = (static_cast<result_type>(block_[2 * pos_]) << 32) | block_[2 * pos_ + 1];
        ++pos_;
        return v;
    }

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() noexcept;

private:
    void refill() noexcept;

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> block_{};
    int pos_ = 2;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// SplitMix64 finalizer; used to derive child seeds from a root seed.
[[nodiscard]] constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t tag) noexcept {
    return mix_seed(root ^ mix_seed(tag));
}

}  // namespace gsub
