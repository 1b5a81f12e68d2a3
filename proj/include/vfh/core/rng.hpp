#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "vfh/core/tensor.hpp"

namespace vfh::core {

/// splitmix64 generator. The raw 64-bit stream is fixed for a given seed on
/// every platform; uniform() uses the top 53 bits.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) noexcept : state_(seed) {}

    std::uint64_t next_u64() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept { return n ? next_u64() % n : 0; }

    /// Box-Muller; one normal per call (the sine half is discarded).
    double normal() noexcept {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t state() const noexcept { return state_; }

private:
    std::uint64_t state_;
};

/// Derives an independent seed from a base seed and a stream label.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    Rng r(seed ^ (stream * 0xd1b54a32d192ed03ULL));
    r.next_u64();
    return r.next_u64();
}

inline Tensor uniform_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    for (double& v : t.data()) v = rng.uniform(lo, hi);
    return t;
}

}  // namespace vfh::core
