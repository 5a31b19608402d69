#pragma once

#include <cmath>
#include <cstdint>

namespace pw {

// Keyed, splittable random stream.  Each stream owns an independent state
// derived from a seed and a chain of split keys, so ensemble members can be
// generated in any order (or concurrently) with identical results.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(mix(seed ^ kPhi)) {}

    // Derive an independent child stream for unit `key` (trajectory index,
    // bootstrap replicate, sweep cell, ...).
    RngStream split(std::uint64_t key) const {
        return RngStream(state_ ^ mix(key + kPhi), tag{});
    }

    std::uint64_t next_u64() {
        state_ += kPhi;
        return mix(state_);
    }

    // Uniform on the open interval (0, 1).
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Mean-parameterized exponential variate.
    double exponential(double mean) {
        return -mean * std::log(uniform01());
    }

    // Unconstrained Laplace variate via inverse CDF.
    double laplace(double location, double scale) {
        const double u = uniform01();
        return u < 0.5 ? location + scale * std::log(2.0 * u)
                       : location - scale * std::log(2.0 * (1.0 - u));
    }

private:
    struct tag {};
    RngStream(std::uint64_t raw, tag) : state_(mix(raw)) {}

    static constexpr std::uint64_t kPhi = 0x9e3779b97f4a7c15ULL;

    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace pw
