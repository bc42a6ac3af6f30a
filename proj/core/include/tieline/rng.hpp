#pragma once

// Counter-based deterministic random streams.
//
// A draw is a pure function of (seed, stream, counter): the stream key is
// derived from the seed and a stream id, and each draw hashes the key with
// a monotonically increasing counter through the SplitMix64 finalizer.
// House i always uses its own stream, so its draws do not depend on how
// many other houses exist or in which order they are processed.

#include <cstdint>
#include <string_view>

namespace tieline {

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// FNV-1a, used to turn stream names into ids.
constexpr std::uint64_t stream_id(std::string_view name) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0) noexcept
        : key_(mix64(mix64(seed ^ mix64(stream)) ^ mix64(substream + 0x632BE59BD9B4E019ULL))) {}

    std::uint64_t next_u64() noexcept { return mix64(key_ ^ mix64(counter_++)); }

    /// Uniform on [0, 1) with 53 bits.
    double uniform01() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) noexcept { return a + (b - a) * uniform01(); }

    /// Standard normal by Box-Muller; consumes two draws per call.
    double standard_normal() noexcept;

    double normal(double mean, double stddev) noexcept { return mean + stddev * standard_normal(); }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace tieline
