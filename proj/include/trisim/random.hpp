#pragma once

#include <cstdint>

#include "trisim/vec2.hpp"

namespace trisim {

/// splitmix64 step; used to derive independent per-task seeds from one root
/// seed so fuzz campaigns stay replayable regardless of evaluation order.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic xoshiro256** generator with hand-rolled uniform doubles,
/// so outputs are identical across platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& w : s_) w = x = splitmix64(x);
    }

    std::uint64_t raw() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(raw() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Log-uniform over [a, b], a, b > 0.
    double log_uniform(double a, double b) {
        return a * std::exp(uniform() * std::log(b / a));
    }

    /// Unit vector with uniform direction.
    Vec2 unit_vec() {
        const double th = uniform(0.0, 6.283185307179586476925286766559);
        return {std::cos(th), std::sin(th)};
    }

private:
    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
    std::uint64_t s_[4];
};

} // namespace trisim
