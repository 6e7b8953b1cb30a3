#pragma once

// Brute-force reference implementations. Everything here recomputes from
// scratch, with no sorting, caching or early exits, and is meant to be read
// against the definitions rather than run fast. Only this module ever sees
// the held-out test response.

#include <cstddef>
#include <span>
#include <vector>

#include "lcpms/core_types.hpp"
#include "lcpms/lcp_core.hpp"
#include "lcpms/model.hpp"
#include "lcpms/selection.hpp"
#include "lcpms/random.hpp"

namespace lcpms::oracle {

/// Calibration data plus the true test pair (x_new, y_new).
struct OracleInstance {
    Dataset calib;
    std::vector<double> x_new;
    double y_new = 0.0;
    ModelBank models;
    KernelSpec kernel;
    GammaGrid grid;
    double alpha = 0.1;

    [[nodiscard]] std::size_t n() const noexcept { return calib.size(); }
    /// Covariate / response of point i in the augmented sample; i == n is the test pair.
    [[nodiscard]] std::span<const double> x(std::size_t i) const noexcept {
        return i == calib.size() ? std::span<const double>(x_new) : calib.x(i);
    }
    [[nodiscard]] double y(std::size_t i) const noexcept { return i == calib.size() ? y_new : calib.y(i); }
};

/// min{v : mass of residuals <= v reaches 1 - gamma}, scanning every candidate
/// v against every residual.
[[nodiscard]] double naive_quantile(std::span<const WeightedResidual> residuals, double gamma);

/// C_k on the augmented sample with point i removed, evaluated at x_i.
/// For i < n this swaps the test pair in for point i; i == n gives the
/// interval on the observed calibration set at x_new.
[[nodiscard]] Interval oracle_interval(const OracleInstance& inst, std::size_t i, std::size_t k, double gamma);

/// Every length-minimizing model of the oracle intervals at (i, gamma).
[[nodiscard]] std::vector<std::size_t> oracle_minimizers(const OracleInstance& inst, std::size_t i, double gamma);

/// Number of i in [0, n] with y_i inside the shortest oracle interval at level g.
[[nodiscard]] std::size_t oracle_coverage_count(const OracleInstance& inst, std::size_t g);

struct OracleGammaHat {
    double gamma = 0.0;
    std::size_t index = 0;
    bool fallback = false;
};

[[nodiscard]] OracleGammaHat oracle_gamma_hat(const OracleInstance& inst);

[[nodiscard]] SurrogatePair naive_surrogate_pair(const Dataset& calib, const ModelBank& models, std::size_t i,
                                                 std::size_t k, std::span<const double> x_new, double gamma,
                                                 const KernelSpec& kernel);

struct NaiveResult {
    IntervalUnion interval;
    SelectionTrace trace;
    GammaBounds bounds;
    std::vector<SafeSet> safe_sets;  ///< g-major, one per (g, i)
};

/// End-to-end selection without any caching. Never sees y_new.
[[nodiscard]] NaiveResult naive_lcpms(const Dataset& calib, std::span<const double> x_new, double alpha,
                                      const GammaGrid& grid, const ModelBank& models, const KernelSpec& kernel);

/// Random instance for property tests: n in [5, 30], K in [1, 4], covariates
/// uniform on [-2, 2], smooth random means and models, bandwidth in [0.2, 2].
/// About one in five instances is quantized to force residual ties.
[[nodiscard]] OracleInstance random_instance(Rng& rng, const GammaGrid& grid = GammaGrid::standard());

}  // namespace lcpms::oracle
