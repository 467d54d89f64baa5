#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace d2d::rng {

using Philox4x32Counter = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., SC'11): a keyed bijection of
/// 128-bit counters.
Philox4x32Counter philox4x32_10(Philox4x32Counter counter, Philox4x32Key key);

/// Random stream addressed by (seed, trial, stream). Each (trial, stream)
/// pair is an independent substream, so trials can run in any order or on any
/// thread and still draw the same numbers.
class CounterRng {
public:
    using result_type = std::uint32_t;

    CounterRng(std::uint64_t seed, std::uint64_t trial, std::uint32_t stream);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform();

    /// Unit-mean exponential.
    double exponential();

    /// Poisson variate by inversion; means above 500 are split into a sum of
    /// smaller Poisson variates.
    std::uint64_t poisson(double mean);

private:
    void refill();

    Philox4x32Key key_;
    Philox4x32Counter counter_;
    Philox4x32Counter block_{};
    int next_ = 4;
};

}  // namespace d2d::rng
