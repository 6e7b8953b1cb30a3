#pragma once

#include <cstdint>
#include <random>

namespace lcpms {

/// Portable random stream: 64-bit Mersenne Twister with fixed conversions to
/// uniform and normal variates, so samples do not depend on the standard
/// library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

[[nodiscard]] std::uint64_t splitmix64(std::uint64_t x) noexcept;
[[nodiscard]] std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t value) noexcept;

}  // namespace lcpms
