#pragma once

#include <cmath>
#include <cstdint>

// Counter-based random streams. Every draw is a pure function of a seed and a
// small tuple of integer coordinates, so replications, sensors and time slots
// can be sampled independently and reruns are bit-identical across platforms
// (no std::*_distribution, whose output is implementation-defined).

namespace agesched::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

/// SplitMix64 finalizer (Vigna); full-avalanche mix of a 64-bit word.
inline std::uint64_t mix_bits(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Derives an independent stream key from a parent key and a coordinate.
inline std::uint64_t derive(std::uint64_t key, std::uint64_t coord) {
    return mix_bits(key + kGolden * (coord + 1));
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double to_unit(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// Unbiased-enough bounded integer in [0, n) (Lemire multiply-shift).
inline std::uint64_t bound(std::uint64_t h, std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(h) * n) >> 64);
}

/// Sequential SplitMix64 stream with a Box-Muller gaussian on top.
class Stream {
  public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += kGolden;
        return mix_bits(state_);
    }

    double next_unit() { return to_unit(next_u64()); }

    std::uint64_t next_below(std::uint64_t n) { return bound(next_u64(), n); }

    double next_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // 1 - u1 lies in (0, 1], so the log is finite.
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));
        const double a = 6.28318530717958647692528676655900577 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace agesched::rng
