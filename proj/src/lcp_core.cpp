#include "lcpms/lcp_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lcpms/diagnostics.hpp"

namespace lcpms {

namespace {

constexpr long double kLevelSlack = 1.0L - 0x1p-40L;

}  // namespace

Mass to_mass(double weight) {
    if (!(weight >= 0.0 && weight <= 1.0)) {
        throw std::invalid_argument("to_mass: kernel weight must lie in [0, 1]");
    }
    return static_cast<Mass>(std::ldexp(weight, kMassFractionBits));
}

Mass required_mass(double gamma, Mass total) {
    const long double level = (1.0L - static_cast<long double>(gamma)) * kLevelSlack;
    const long double target = std::ceil(level * static_cast<long double>(total));
    if (target <= 0.0L) return 0;
    const auto t = static_cast<Mass>(target);
    return std::min(t, total);
}

std::size_t required_count(double alpha, std::size_t n) {
    const long double level = (1.0L - static_cast<long double>(alpha)) * kLevelSlack;
    const long double target = std::ceil(level * static_cast<long double>(n + 1));
    if (target <= 0.0L) return 0;
    return std::min(static_cast<std::size_t>(target), n + 1);
}

double mass_ratio(Mass part, Mass total) noexcept {
    if (total == 0) return 0.0;
    return static_cast<double>(static_cast<long double>(part) / static_cast<long double>(total));
}

void check_gamma(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw std::invalid_argument("miscoverage level gamma must lie in (0, 1)");
    }
}

std::vector<double> localizer_weights(const Dataset& points, std::span<const double> x0,
                                      const KernelSpec& kernel) {
    const std::size_t n = points.size();
    std::vector<double> w(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = kernel.weight(points.x(i), x0);
        total += w[i];
    }
    if (total == 0.0) {
        warn_once(Warning::UniformFallback);
        std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(n));
        return w;
    }
    for (auto& v : w) v /= total;
    return w;
}

ResidualProfile build_profile(std::span<const WeightedResidual> residuals) {
    if (residuals.empty()) throw std::invalid_argument("build_profile: no residuals");
    if (residuals.size() > kMaxPoints) throw std::invalid_argument("build_profile: too many residuals");

    std::vector<Mass> mass(residuals.size());
    Mass total = 0;
    for (std::size_t j = 0; j < residuals.size(); ++j) {
        if (std::isnan(residuals[j].magnitude) || residuals[j].magnitude < 0.0) {
            throw std::invalid_argument("build_profile: residual magnitudes must be nonnegative");
        }
        mass[j] = to_mass(residuals[j].weight);
        total += mass[j];
    }
    if (total == 0) {
        warn_once(Warning::UniformFallback);
        std::fill(mass.begin(), mass.end(), Mass{1});
        total = static_cast<Mass>(residuals.size());
    }

    std::vector<std::size_t> order(residuals.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return residuals[a].magnitude < residuals[b].magnitude;
    });

    ResidualProfile profile;
    profile.total_mass = total;
    Mass cum = 0;
    for (const std::size_t j : order) {
        const double r = residuals[j].magnitude;
        if (std::isinf(r)) break;
        cum += mass[j];
        if (!profile.sorted_residuals.empty() && profile.sorted_residuals.back() == r) {
            profile.cum_mass.back() = cum;
        } else {
            profile.sorted_residuals.push_back(r);
            profile.cum_mass.push_back(cum);
        }
    }
    return profile;
}

double weighted_quantile(const ResidualProfile& profile, double gamma) {
    check_gamma(gamma);
    const Mass target = required_mass(gamma, profile.total_mass);
    const auto it = std::lower_bound(profile.cum_mass.begin(), profile.cum_mass.end(), target);
    if (it == profile.cum_mass.end()) return kInfinity;
    return profile.sorted_residuals[static_cast<std::size_t>(it - profile.cum_mass.begin())];
}

Interval lcp_interval(const Dataset& calib, const Model& model, std::span<const double> x0, double gamma,
                      const KernelSpec& kernel) {
    check_gamma(gamma);
    std::vector<WeightedResidual> residuals(calib.size());
    for (std::size_t i = 0; i < calib.size(); ++i) {
        residuals[i] = {std::abs(calib.y(i) - model.predict(calib.x(i))), kernel.weight(calib.x(i), x0)};
    }
    return {model.predict(x0), weighted_quantile(build_profile(residuals), gamma)};
}

}  // namespace lcpms
