#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace semcom {

/// Counter-based generator: output k of stream (seed, id) is splitmix64(key + k * golden),
/// where key = splitmix64(seed ^ splitmix64(id + salt)). Streams are independent of the
/// order in which they are consumed, so per-device streams survive changes in N.
///
/// Uniform and normal variates are derived by hand (53-bit mantissa, Box-Muller) rather than
/// with <random> distributions, whose algorithms differ between standard libraries.
class CounterRng {
public:
    static constexpr std::string_view kName = "splitmix64-ctr/v1";

    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t next() noexcept {
        ++counter_;
        return mix(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
    }

    std::uint64_t counter() const noexcept { return counter_; }

    /// Uniform on [0, 1).
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1).
    double uniform_open() noexcept { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; consumes two draws per variate.
    double normal() noexcept {
        const double u1 = uniform_open();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

    /// Normal(mean, stddev) conditioned on [lo, hi], by rejection from the parent normal.
    /// Returns the clamped mean if stddev is zero; gives up after max_tries and clamps.
    double truncated_normal(double mean, double stddev, double lo, double hi, int max_tries = 10000) noexcept {
        if (stddev <= 0.0) return std::min(std::max(mean, lo), hi);
        for (int i = 0; i < max_tries; ++i) {
            const double x = normal(mean, stddev);
            if (x >= lo && x <= hi) return x;
        }
        return std::min(std::max(mean, lo), hi);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Stream namespaces; the low 32 bits carry a device or sample index.
namespace streams {
inline constexpr std::uint64_t kScenarioDevice = 1ULL << 32;
inline constexpr std::uint64_t kRandomBaseline = 2ULL << 32;
inline constexpr std::uint64_t kOracle = 3ULL << 32;
inline constexpr std::uint64_t kTest = 4ULL << 32;
}  // namespace streams

}  // namespace semcom
