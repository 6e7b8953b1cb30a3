#pragma once

// Localized conformal model selection.
//
// For every calibration point i, model k and level gamma, the surrogate
// intervals C-/C+ replace the unseen test response by a perfectly
// conforming one (residual 0) or an infinitely nonconforming one. Models
// whose best case |C-| does not exceed the shortest worst case |C+| form the
// safe index set. Coverage of the intersection (of C-) and the union (of C+)
// over safe sets across calibration points certifies a band of admissible
// levels [gamma_lo, gamma_hi]; the prediction set is the union, over that
// band, of the shortest single-model interval at the test point.
//
// Model indices are 0-based in this API.

#include <cstddef>
#include <span>
#include <vector>

#include "lcpms/core_types.hpp"
#include "lcpms/lcp_core.hpp"
#include "lcpms/model.hpp"

namespace lcpms {

enum class Execution { Serial, Parallel };

struct SurrogatePair {
    Interval lower;  ///< C-
    Interval upper;  ///< C+
    std::size_t i = 0;
    std::size_t k = 0;
    double gamma = 0.0;
};

struct SafeSet {
    std::size_t i = 0;
    double gamma = 0.0;
    std::vector<std::size_t> members;  ///< ascending

    friend bool operator==(const SafeSet&, const SafeSet&) = default;
};

struct GammaBounds {
    double alpha = 0.0;
    double gamma_lo = 0.0;
    double gamma_hi = 0.0;
    std::size_t lo_index = 0;  ///< position of gamma_lo in the grid
    std::size_t hi_index = 0;
    bool lo_fallback = false;  ///< no level met the lower condition; min grid value used
    bool hi_fallback = false;

    [[nodiscard]] bool flagged() const noexcept { return lo_fallback || hi_fallback; }
    friend bool operator==(const GammaBounds&, const GammaBounds&) = default;
};

struct SelectionStep {
    double gamma = 0.0;
    std::size_t model = 0;
    Interval interval;

    friend bool operator==(const SelectionStep&, const SelectionStep&) = default;
};

struct SelectionTrace {
    std::vector<SelectionStep> steps;  ///< one per admissible grid level, ascending gamma
    bool fallback = false;

    friend bool operator==(const SelectionTrace&, const SelectionTrace&) = default;
};

struct LcpmsResult {
    IntervalUnion interval;
    SelectionTrace trace;
    GammaBounds bounds;
};

/// Quantile tables for one test covariate. Surrogate half-widths are indexed
/// by (i, k, g); full-calibration half-widths at the test point by (k, g).
class PointAnalysis {
public:
    PointAnalysis(std::size_t n, std::size_t num_models, std::size_t num_levels);

    [[nodiscard]] std::size_t n() const noexcept { return n_; }
    [[nodiscard]] std::size_t num_models() const noexcept { return num_models_; }
    [[nodiscard]] std::size_t num_levels() const noexcept { return num_levels_; }

    [[nodiscard]] double q_minus(std::size_t i, std::size_t k, std::size_t g) const noexcept {
        return q_minus_[(i * num_models_ + k) * num_levels_ + g];
    }
    [[nodiscard]] double q_plus(std::size_t i, std::size_t k, std::size_t g) const noexcept {
        return q_plus_[(i * num_models_ + k) * num_levels_ + g];
    }
    [[nodiscard]] double q_full(std::size_t k, std::size_t g) const noexcept {
        return q_full_[k * num_levels_ + g];
    }
    [[nodiscard]] double prediction(std::size_t k) const noexcept { return prediction_[k]; }

private:
    friend class LcpmsPredictor;

    std::size_t n_;
    std::size_t num_models_;
    std::size_t num_levels_;
    std::vector<double> q_minus_;
    std::vector<double> q_plus_;
    std::vector<double> q_full_;
    std::vector<double> prediction_;
};

/// Caches everything about a calibration set that does not depend on the
/// test covariate: fitted values, residuals, per-model residual order and
/// the pairwise localizer mass matrix.
class LcpmsPredictor {
public:
    LcpmsPredictor(Dataset calib, ModelBank models, KernelSpec kernel, GammaGrid grid,
                   Execution execution = Execution::Parallel);

    [[nodiscard]] PointAnalysis analyze(std::span<const double> x_new) const;

    /// Selection over the whole bank.
    [[nodiscard]] LcpmsResult select(const PointAnalysis& analysis, double alpha) const;
    /// Selection restricted to `subset` (ascending bank indices). A singleton
    /// subset gives calibrated single-model localized conformal prediction.
    [[nodiscard]] LcpmsResult select(const PointAnalysis& analysis, double alpha,
                                     std::span<const std::size_t> subset) const;

    [[nodiscard]] LcpmsResult predict(std::span<const double> x_new, double alpha) const;

    /// Uncalibrated single-model half-widths at one level gamma, per model.
    [[nodiscard]] std::vector<double> localized_half_widths(std::span<const double> x_new, double gamma) const;

    /// Safe sets for every (g, i), g-major.
    [[nodiscard]] std::vector<SafeSet> safe_sets(const PointAnalysis& analysis) const;
    [[nodiscard]] std::vector<SurrogatePair> surrogate_pairs(const PointAnalysis& analysis, std::size_t i,
                                                             std::size_t g) const;

    [[nodiscard]] const Dataset& calibration() const noexcept { return calib_; }
    [[nodiscard]] const ModelBank& models() const noexcept { return models_; }
    [[nodiscard]] const KernelSpec& kernel() const noexcept { return kernel_; }
    [[nodiscard]] const GammaGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t num_models() const noexcept { return models_.size(); }

    [[nodiscard]] double fitted(std::size_t i, std::size_t k) const noexcept { return fitted_[i * models_.size() + k]; }
    [[nodiscard]] double residual(std::size_t i, std::size_t k) const noexcept {
        return residual_[i * models_.size() + k];
    }

private:
    std::vector<Mass> test_point_mass(std::span<const double> x_new, Mass& total) const;
    void analyze_point(std::size_t i, std::span<const double> x_new, PointAnalysis& out) const;

    Dataset calib_;
    ModelBank models_;
    KernelSpec kernel_;
    GammaGrid grid_;
    Execution execution_;

    std::vector<double> fitted_;    // (i, k)
    std::vector<double> residual_;  // (i, k)
    // Per model: calibration indices sorted by residual, and the residuals in that order.
    std::vector<std::vector<std::size_t>> order_;
    std::vector<std::vector<double>> sorted_residual_;
    std::vector<Mass> pair_mass_;   // (i, j): to_mass(H(x_j, x_i)); diagonal unused
    std::vector<Mass> loo_mass_;    // sum_{j != i} pair_mass(i, j)
};

[[nodiscard]] SurrogatePair surrogate_pair(const Dataset& calib, const ModelBank& models, std::size_t i,
                                           std::size_t k, std::span<const double> x_new, double gamma,
                                           const KernelSpec& kernel);

/// Requires exactly one pair per model, all for the same (i, gamma).
[[nodiscard]] SafeSet safe_index_set(std::span<const SurrogatePair> pairs);

[[nodiscard]] GammaBounds gamma_bounds(const Dataset& calib, std::span<const double> x_new, double alpha,
                                       const GammaGrid& grid, const ModelBank& models, const KernelSpec& kernel);

[[nodiscard]] LcpmsResult lcpms_interval(const Dataset& calib, std::span<const double> x_new, double alpha,
                                         const GammaGrid& grid, const ModelBank& models, const KernelSpec& kernel);

void check_alpha(double alpha);

}  // namespace lcpms
