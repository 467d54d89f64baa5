#include "d2d/rng.hpp"

#include <cmath>

#include "d2d/errors.hpp"

namespace d2d::rng {

namespace {

constexpr std::uint32_t kMultiplier0 = 0xD2511F53u;
constexpr std::uint32_t kMultiplier1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

Philox4x32Counter round(const Philox4x32Counter& c, const Philox4x32Key& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMultiplier0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMultiplier1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

Philox4x32Counter philox4x32_10(Philox4x32Counter counter, Philox4x32Key key) {
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        counter = round(counter, key);
    }
    return counter;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t trial, std::uint32_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      counter_{0u, stream, static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)} {}

void CounterRng::refill() {
    block_ = philox4x32_10(counter_, key_);
    ++counter_[0];
    next_ = 0;
}

CounterRng::result_type CounterRng::operator()() {
    if (next_ == 4) refill();
    return block_[next_++];
}

double CounterRng::uniform() {
    const std::uint64_t hi = (*this)() >> 5;  // 27 bits
    const std::uint64_t lo = (*this)() >> 6;  // 26 bits
    return (static_cast<double>((hi << 26) | lo) + 0.5) * 0x1.0p-53;
}

double CounterRng::exponential() { return -std::log(uniform()); }

std::uint64_t CounterRng::poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) throw DomainError("poisson: mean must be finite and >= 0");
    constexpr double kMaxInversionMean = 500.0;
    std::uint64_t total = 0;
    while (mean > kMaxInversionMean) {
        total += poisson(kMaxInversionMean);
        mean -= kMaxInversionMean;
    }
    if (mean == 0.0) return total;
    const double u = uniform();
    double probability = std::exp(-mean);
    double cumulative = probability;
    std::uint64_t k = 0;
    while (u > cumulative) {
        ++k;
        probability *= mean / static_cast<double>(k);
        cumulative += probability;
        if (probability < 1e-300 && static_cast<double>(k) > mean) break;
    }
    return total + k;
}

}  // namespace d2d::rng
