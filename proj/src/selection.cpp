#include "lcpms/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "lcpms/diagnostics.hpp"
#include "lcpms/parallel.hpp"

namespace lcpms {

namespace {

using Level = std::ptrdiff_t;

void fill_thresholds(const GammaGrid& grid, Mass total, std::vector<Mass>& out) {
    out.resize(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) out[g] = required_mass(grid[g], total);
}

}  // namespace

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("alpha must lie in (0, 1)");
    }
}

PointAnalysis::PointAnalysis(std::size_t n, std::size_t num_models, std::size_t num_levels)
    : n_(n),
      num_models_(num_models),
      num_levels_(num_levels),
      q_minus_(n * num_models * num_levels),
      q_plus_(n * num_models * num_levels),
      q_full_(num_models * num_levels),
      prediction_(num_models) {}

LcpmsPredictor::LcpmsPredictor(Dataset calib, ModelBank models, KernelSpec kernel, GammaGrid grid,
                               Execution execution)
    : calib_(std::move(calib)),
      models_(std::move(models)),
      kernel_(kernel),
      grid_(std::move(grid)),
      execution_(execution) {
    if (models_.empty()) throw std::invalid_argument("LcpmsPredictor: empty model bank");
    for (const auto& m : models_) {
        if (!m) throw std::invalid_argument("LcpmsPredictor: null model");
    }
    const std::size_t n = calib_.size();
    const std::size_t num_models = models_.size();
    if (n > kMaxPoints) throw std::invalid_argument("LcpmsPredictor: calibration set too large");
    const bool parallel = execution_ == Execution::Parallel;

    fitted_.resize(n * num_models);
    residual_.resize(n * num_models);
    parallel_for(n, parallel, [&](std::size_t i) {
        for (std::size_t k = 0; k < num_models; ++k) {
            const double f = models_[k]->predict(calib_.x(i));
            fitted_[i * num_models + k] = f;
            residual_[i * num_models + k] = std::abs(calib_.y(i) - f);
        }
    });

    order_.resize(num_models);
    sorted_residual_.resize(num_models);
    for (std::size_t k = 0; k < num_models; ++k) {
        auto& order = order_[k];
        order.resize(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double ra = residual(a, k);
            const double rb = residual(b, k);
            return ra < rb || (ra == rb && a < b);
        });
        auto& sorted = sorted_residual_[k];
        sorted.resize(n);
        for (std::size_t p = 0; p < n; ++p) sorted[p] = residual(order[p], k);
        if (!std::isfinite(sorted.back())) {
            throw std::invalid_argument("LcpmsPredictor: model " + std::to_string(k) +
                                        " produced a non-finite residual");
        }
    }

    pair_mass_.assign(n * n, 0);
    loo_mass_.assign(n, 0);
    parallel_for(n, parallel, [&](std::size_t i) {
        Mass total = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const Mass w = to_mass(kernel_.weight(calib_.x(j), calib_.x(i)));
            pair_mass_[i * n + j] = w;
            total += w;
        }
        loo_mass_[i] = total;
    });
}

void LcpmsPredictor::analyze_point(std::size_t i, std::span<const double> x_new, PointAnalysis& out) const {
    const std::size_t n = calib_.size();
    const std::size_t num_models = models_.size();
    const std::size_t num_levels = grid_.size();
    const Mass* row = pair_mass_.data() + i * n;

    // The held-out slot carries the test covariate's weight at x_i.
    Mass augmented = to_mass(kernel_.weight(x_new, calib_.x(i)));
    Mass total = loo_mass_[i] + augmented;
    std::vector<Mass> ones;
    if (total == 0) {
        warn_once(Warning::UniformFallback);
        ones.assign(n, Mass{1});
        row = ones.data();
        augmented = 1;
        total = static_cast<Mass>(n);
    }
    // Shifted by one so that slot 0 is a sentinel no cumulative mass reaches.
    std::vector<Mass> threshold;
    fill_thresholds(grid_, total, threshold);
    threshold.insert(threshold.begin(), total + augmented + 1);
    const Mass* th = threshold.data() + 1;

    for (std::size_t k = 0; k < num_models; ++k) {
        double* q_minus = out.q_minus_.data() + (i * num_models + k) * num_levels;
        double* q_plus = out.q_plus_.data() + (i * num_models + k) * num_levels;
        Level gm = static_cast<Level>(num_levels) - 1;
        Level gp = gm;

        // C-: the augmented residual 0 is the smallest candidate.
        while (augmented >= th[gm]) q_minus[gm--] = 0.0;

        // Walk residuals in ascending order, settling levels once a run of
        // equal residuals is complete. Slot i is skipped; a run that ends
        // just before it is settled there.
        const std::size_t* order = order_[k].data();
        const double* sorted = sorted_residual_[k].data();
        Mass cum = 0;
        for (std::size_t p = 0; p < n && gp >= 0; ++p) {
            const std::size_t j = order[p];
            if (j != i) {
                cum += row[j];
            } else if (p == 0 || sorted[p - 1] != sorted[p]) {
                continue;
            }
            if (p + 1 < n && sorted[p + 1] == sorted[p]) continue;
            const double r = sorted[p];
            while (cum >= th[gp]) q_plus[gp--] = r;
            const Mass lower = cum + augmented;
            while (lower >= th[gm]) q_minus[gm--] = r;
        }
        while (gp >= 0) q_plus[gp--] = kInfinity;
        while (gm >= 0) q_minus[gm--] = kInfinity;
    }
}

std::vector<Mass> LcpmsPredictor::test_point_mass(std::span<const double> x_new, Mass& total) const {
    const std::size_t n = calib_.size();
    std::vector<Mass> mass(n);
    total = 0;
    for (std::size_t j = 0; j < n; ++j) {
        mass[j] = to_mass(kernel_.weight(calib_.x(j), x_new));
        total += mass[j];
    }
    if (total == 0) {
        warn_once(Warning::UniformFallback);
        std::fill(mass.begin(), mass.end(), Mass{1});
        total = static_cast<Mass>(n);
    }
    return mass;
}

std::vector<double> LcpmsPredictor::localized_half_widths(std::span<const double> x_new, double gamma) const {
    check_gamma(gamma);
    if (x_new.size() != calib_.dim()) throw std::invalid_argument("localized_half_widths: dimension mismatch");
    Mass total = 0;
    const std::vector<Mass> mass = test_point_mass(x_new, total);
    const Mass target = required_mass(gamma, total);
    std::vector<double> out(models_.size(), kInfinity);
    for (std::size_t k = 0; k < models_.size(); ++k) {
        Mass cum = 0;
        for (std::size_t p = 0; p < calib_.size(); ++p) {
            cum += mass[order_[k][p]];
            if (cum >= target) {
                out[k] = sorted_residual_[k][p];
                break;
            }
        }
    }
    return out;
}

PointAnalysis LcpmsPredictor::analyze(std::span<const double> x_new) const {
    if (x_new.size() != calib_.dim()) throw std::invalid_argument("analyze: covariate dimension mismatch");
    const std::size_t n = calib_.size();
    const std::size_t num_models = models_.size();
    const std::size_t num_levels = grid_.size();
    PointAnalysis out(n, num_models, num_levels);

    for (std::size_t k = 0; k < num_models; ++k) out.prediction_[k] = models_[k]->predict(x_new);

    // Full calibration set localized at the test covariate.
    Mass total = 0;
    const std::vector<Mass> mass = test_point_mass(x_new, total);
    std::vector<Mass> threshold;
    fill_thresholds(grid_, total, threshold);
    for (std::size_t k = 0; k < num_models; ++k) {
        double* q = out.q_full_.data() + k * num_levels;
        Level g = static_cast<Level>(num_levels) - 1;
        Mass cum = 0;
        const auto& order = order_[k];
        const auto& sorted = sorted_residual_[k];
        for (std::size_t p = 0; p < n && g >= 0; ++p) {
            cum += mass[order[p]];
            if (p + 1 < n && sorted[p + 1] == sorted[p]) continue;
            while (g >= 0 && cum >= threshold[g]) q[g--] = sorted[p];
        }
        while (g >= 0) q[g--] = kInfinity;
    }

    parallel_for(n, execution_ == Execution::Parallel, [&](std::size_t i) { analyze_point(i, x_new, out); });
    return out;
}

LcpmsResult LcpmsPredictor::select(const PointAnalysis& analysis, double alpha) const {
    std::vector<std::size_t> all(models_.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return select(analysis, alpha, all);
}

LcpmsResult LcpmsPredictor::select(const PointAnalysis& analysis, double alpha,
                                   std::span<const std::size_t> subset) const {
    check_alpha(alpha);
    if (subset.empty()) throw std::invalid_argument("select: empty model subset");
    for (std::size_t s = 0; s < subset.size(); ++s) {
        if (subset[s] >= models_.size() || (s > 0 && subset[s - 1] >= subset[s])) {
            throw std::invalid_argument("select: subset must be ascending bank indices");
        }
    }
    const std::size_t n = calib_.size();
    const std::size_t num_levels = grid_.size();
    const std::size_t needed = required_count(alpha, n);

    std::vector<std::size_t> count_lower(num_levels, 0);
    std::vector<std::size_t> count_upper(num_levels, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t g = 0; g < num_levels; ++g) {
            double shortest_upper = kInfinity;
            for (const std::size_t k : subset) shortest_upper = std::min(shortest_upper, analysis.q_plus(i, k, g));
            bool in_all_lower = true;
            bool in_any_upper = false;
            std::size_t members = 0;
            for (const std::size_t k : subset) {
                const double qm = analysis.q_minus(i, k, g);
                if (!(qm <= shortest_upper)) continue;
                ++members;
                const double r = residual(i, k);
                in_all_lower = in_all_lower && r <= qm;
                in_any_upper = in_any_upper || r <= analysis.q_plus(i, k, g);
            }
            if (members == 0) throw std::logic_error("select: empty safe index set");
            count_lower[g] += in_all_lower ? 1 : 0;
            count_upper[g] += in_any_upper ? 1 : 0;
        }
    }

    LcpmsResult result;
    auto& bounds = result.bounds;
    bounds.alpha = alpha;
    bounds.lo_fallback = true;
    bounds.hi_fallback = true;
    for (std::size_t g = num_levels; g-- > 0;) {
        if (bounds.lo_fallback && count_lower[g] >= needed) {
            bounds.lo_index = g;
            bounds.lo_fallback = false;
        }
        if (bounds.hi_fallback && count_upper[g] + 1 >= needed) {
            bounds.hi_index = g;
            bounds.hi_fallback = false;
        }
    }
    bounds.gamma_lo = grid_[bounds.lo_index];
    bounds.gamma_hi = grid_[bounds.hi_index];
    result.trace.fallback = bounds.flagged();

    for (std::size_t g = bounds.lo_index; g <= bounds.hi_index; ++g) {
        std::size_t best = subset.front();
        for (const std::size_t k : subset) {
            if (analysis.q_full(k, g) < analysis.q_full(best, g)) best = k;
        }
        const Interval iv(analysis.prediction(best), analysis.q_full(best, g));
        result.interval.insert(iv);
        result.trace.steps.push_back({grid_[g], best, iv});
    }
    return result;
}

LcpmsResult LcpmsPredictor::predict(std::span<const double> x_new, double alpha) const {
    return select(analyze(x_new), alpha);
}

std::vector<SafeSet> LcpmsPredictor::safe_sets(const PointAnalysis& analysis) const {
    const std::size_t n = calib_.size();
    std::vector<SafeSet> sets;
    sets.reserve(grid_.size() * n);
    for (std::size_t g = 0; g < grid_.size(); ++g) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto pairs = surrogate_pairs(analysis, i, g);
            sets.push_back(safe_index_set(pairs));
        }
    }
    return sets;
}

std::vector<SurrogatePair> LcpmsPredictor::surrogate_pairs(const PointAnalysis& analysis, std::size_t i,
                                                           std::size_t g) const {
    std::vector<SurrogatePair> pairs;
    pairs.reserve(models_.size());
    for (std::size_t k = 0; k < models_.size(); ++k) {
        const double center = fitted(i, k);
        pairs.push_back({Interval(center, analysis.q_minus(i, k, g)), Interval(center, analysis.q_plus(i, k, g)), i,
                         k, grid_[g]});
    }
    return pairs;
}

SurrogatePair surrogate_pair(const Dataset& calib, const ModelBank& models, std::size_t i, std::size_t k,
                             std::span<const double> x_new, double gamma, const KernelSpec& kernel) {
    check_gamma(gamma);
    if (i >= calib.size()) throw std::out_of_range("surrogate_pair: calibration index out of range");
    if (k >= models.size()) throw std::out_of_range("surrogate_pair: model index out of range");
    const Model& model = *models[k];
    const auto xi = calib.x(i);

    std::vector<WeightedResidual> residuals;
    residuals.reserve(calib.size());
    for (std::size_t j = 0; j < calib.size(); ++j) {
        if (j == i) continue;
        residuals.push_back({std::abs(calib.y(j) - model.predict(calib.x(j))), kernel.weight(calib.x(j), xi)});
    }
    const double augmented = kernel.weight(x_new, xi);

    residuals.push_back({0.0, augmented});
    const double lower = weighted_quantile(build_profile(residuals), gamma);
    residuals.back().magnitude = kInfinity;
    const double upper = weighted_quantile(build_profile(residuals), gamma);

    const double center = model.predict(xi);
    return {Interval(center, lower), Interval(center, upper), i, k, gamma};
}

SafeSet safe_index_set(std::span<const SurrogatePair> pairs) {
    if (pairs.empty()) throw std::invalid_argument("safe_index_set: no surrogate pairs");
    double shortest_upper = kInfinity;
    for (const auto& p : pairs) {
        if (p.i != pairs.front().i || p.gamma != pairs.front().gamma) {
            throw std::invalid_argument("safe_index_set: pairs must share i and gamma");
        }
        shortest_upper = std::min(shortest_upper, p.upper.length());
    }
    std::vector<std::size_t> seen;
    SafeSet set{pairs.front().i, pairs.front().gamma, {}};
    for (const auto& p : pairs) {
        seen.push_back(p.k);
        if (p.lower.length() <= shortest_upper) set.members.push_back(p.k);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
        throw std::invalid_argument("safe_index_set: more than one pair for a model");
    }
    std::sort(set.members.begin(), set.members.end());
    if (set.members.empty()) throw std::logic_error("safe_index_set: empty safe set");
    return set;
}

GammaBounds gamma_bounds(const Dataset& calib, std::span<const double> x_new, double alpha, const GammaGrid& grid,
                         const ModelBank& models, const KernelSpec& kernel) {
    return lcpms_interval(calib, x_new, alpha, grid, models, kernel).bounds;
}

LcpmsResult lcpms_interval(const Dataset& calib, std::span<const double> x_new, double alpha, const GammaGrid& grid,
                           const ModelBank& models, const KernelSpec& kernel) {
    const LcpmsPredictor predictor(calib, models, kernel, grid, Execution::Serial);
    return predictor.predict(x_new, alpha);
}

}  // namespace lcpms
