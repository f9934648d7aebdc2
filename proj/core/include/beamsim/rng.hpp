#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "beamsim/types.hpp"

namespace beamsim {

// Counter-based random stream. A stream is fully identified by
// (seed, stream_id); draws are a pure function of (seed, stream_id, counter),
// so any (seed, stream_id) pair reproduces the same sequence on any platform
// and trials can own disjoint streams without shared state.
//
// The generator is a splitmix64 walk whose starting point mixes seed and
// stream_id. Gaussians come from the Box-Muller transform on 53-bit uniforms.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : state_(mix(mix(seed ^ 0x9e3779b97f4a7c15ULL) ^ mix(stream_id))) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    int bit() { return static_cast<int>(next_u64() >> 63); }

    // One Box-Muller pair of independent standard normals.
    void gaussian_pair(double& z0, double& z1) {
        // u1 in (0, 1] keeps the log finite.
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        z0 = radius * std::cos(angle);
        z1 = radius * std::sin(angle);
    }

    // Circularly-symmetric complex Gaussian with E|z|^2 = total_variance.
    cxd complex_gaussian(double total_variance = 1.0) {
        double z0, z1;
        gaussian_pair(z0, z1);
        const double scale = std::sqrt(total_variance / 2.0);
        return {scale * z0, scale * z1};
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
};

} // namespace beamsim
