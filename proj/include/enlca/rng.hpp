#pragma once

#include <cstdint>
#include <limits>

#include "enlca/matrix.hpp"

namespace enlca {

/// Identifies one reproducible random stream.
///
/// Streams are generated by xoshiro256** whose 256-bit state is filled by a
/// SplitMix64 sequence started from mix(seed) ^ mix(stream_id + golden).
/// Normal variates use the Box-Muller transform (both outputs consumed in
/// order). Only integer arithmetic determines the uniform stream, so a
/// given (seed, stream_id) yields the same uniforms on every platform.
struct RngSpec {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    /// Independent child stream, e.g. one per Monte-Carlo trial.
    RngSpec derive(std::uint64_t index) const noexcept;

    friend bool operator==(const RngSpec&, const RngSpec&) = default;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(RngSpec spec) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return next(); }
    std::uint64_t next() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Standard normal via Box-Muller.
    double normal() noexcept;

private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// rows x cols matrix of iid N(0, 1) entries filled in row-major order.
Matrix gaussian_sample(const RngSpec& rng, std::size_t rows, std::size_t cols);

}  // namespace enlca
