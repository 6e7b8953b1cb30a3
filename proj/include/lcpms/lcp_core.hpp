#pragma once

// Localized conformal intervals for a single fixed model.
//
// Localizer weights are accumulated as 128-bit fixed-point "mass" with a
// resolution of 2^-110. Kernel values lie in [0, 1], so any dataset of up to
// 2^16 points sums without overflow, and every cumulative mass is an exact
// integer that does not depend on summation order. All interval paths (the
// cached scan, the generic profile, and the brute-force reference) compare
// the same integers against the same threshold, which is what makes the
// surrogate nesting and the optimized/naive agreement exact.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lcpms/core_types.hpp"
#include "lcpms/model.hpp"

namespace lcpms {

__extension__ using Mass = __int128;

inline constexpr int kMassFractionBits = 110;
inline constexpr std::size_t kMaxPoints = std::size_t{1} << 16;

/// Fixed-point image of a kernel value in [0, 1]. Values below 2^-110 map to 0.
[[nodiscard]] Mass to_mass(double weight);

/// Smallest integer mass that counts as reaching level 1 - gamma of `total`.
/// A relative slack of 2^-40 absorbs the binary representation error of
/// decimal levels, so 9 of 10 equal weights reach 1 - 0.1.
[[nodiscard]] Mass required_mass(double gamma, Mass total);

/// Smallest count m out of n + 1 with m / (n + 1) >= 1 - alpha (same slack).
[[nodiscard]] std::size_t required_count(double alpha, std::size_t n);

[[nodiscard]] double mass_ratio(Mass part, Mass total) noexcept;

/// Normalized localizer weights H(x_i, x0) / sum_j H(x_j, x0). Falls back to
/// uniform weights, with a warning, when every kernel value underflows.
[[nodiscard]] std::vector<double> localizer_weights(const Dataset& points, std::span<const double> x0,
                                                    const KernelSpec& kernel);

struct WeightedResidual {
    double magnitude;  ///< |y - f(x)|, may be +inf
    double weight;     ///< raw kernel value in [0, 1]
};

/// Finite residual magnitudes in ascending order with the cumulative mass of
/// all residuals <= each value. Equal magnitudes share a single step.
struct ResidualProfile {
    std::vector<double> sorted_residuals;
    std::vector<Mass> cum_mass;
    Mass total_mass = 0;  ///< normalizer, includes mass sitting at +inf

    [[nodiscard]] double cumw(std::size_t j) const noexcept { return mass_ratio(cum_mass[j], total_mass); }
    [[nodiscard]] double total_finite_mass() const noexcept {
        return cum_mass.empty() ? 0.0 : mass_ratio(cum_mass.back(), total_mass);
    }
};

/// Throws std::invalid_argument on empty input, NaN magnitudes, or weights
/// outside [0, 1]. All-zero mass is replaced by uniform weights.
[[nodiscard]] ResidualProfile build_profile(std::span<const WeightedResidual> residuals);

/// Smallest residual whose cumulative mass reaches 1 - gamma, or +inf when
/// the finite mass never does. Requires 0 < gamma < 1.
[[nodiscard]] double weighted_quantile(const ResidualProfile& profile, double gamma);

/// Single-model localized conformal interval on `calib` at `x0`.
[[nodiscard]] Interval lcp_interval(const Dataset& calib, const Model& model, std::span<const double> x0,
                                    double gamma, const KernelSpec& kernel);

void check_gamma(double gamma);

}  // namespace lcpms
