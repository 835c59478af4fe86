#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace tsync {

// Portable seeded random streams. Every stochastic component of a run draws
// from its own stream, keyed by (seed, node id, purpose), so trajectories are
// reproducible bit-for-bit regardless of evaluation order or platform. The
// standard <random> distributions are implementation-defined, which is why the
// transforms are spelled out here.

enum class StreamPurpose : std::uint64_t {
    clock_noise = 1,
    exchange_delays = 2,
    weight_init = 3,
    shuffle = 4,
};

constexpr std::uint64_t stream_id(std::uint64_t node, StreamPurpose purpose) {
    return (node << 8) | static_cast<std::uint64_t>(purpose);
}

namespace detail {
constexpr std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace detail

// xoshiro256++ seeded through splitmix64 from (seed, stream).
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t x = seed ^ (stream * 0x9E3779B97F4A7C15ULL) ^ 0xD1B54A32D192ED03ULL;
        for (auto& word : s_) word = detail::splitmix64(x);
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller. Two uniforms per call, no cached spare.
    double gaussian() {
        const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

    double exponential(double mean) { return -mean * std::log(1.0 - uniform01()); }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_{};
};

}  // namespace tsync
