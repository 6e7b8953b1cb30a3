#pragma once

// Candidate regression families for the simulation studies. Both are fitted
// on an independent training sample and then used as fixed functions.

#include <cstddef>
#include <string>
#include <vector>

#include "lcpms/core_types.hpp"
#include "lcpms/model.hpp"

namespace lcpms {

/// Training data for a 1-d learner, sorted by covariate.
class SortedSample {
public:
    explicit SortedSample(const Dataset& train);

    [[nodiscard]] std::size_t size() const noexcept { return xs_.size(); }
    [[nodiscard]] const std::vector<double>& xs() const noexcept { return xs_; }
    [[nodiscard]] const std::vector<double>& ys() const noexcept { return ys_; }
    [[nodiscard]] double y_min() const noexcept { return y_min_; }
    [[nodiscard]] double y_max() const noexcept { return y_max_; }
    [[nodiscard]] double y_mean() const noexcept { return y_mean_; }

private:
    std::vector<double> xs_;
    std::vector<double> ys_;
    double y_min_ = 0.0;
    double y_max_ = 0.0;
    double y_mean_ = 0.0;
};

/// Least-squares coefficients of y ~ a*sin(lambda x) + b*cos(lambda x).
struct SinusoidFit {
    double a = 0.0;
    double b = 0.0;
    bool ok = false;  ///< false when fewer than two points or the normal equations are singular
};

/// Fits over xs[first, last).
[[nodiscard]] SinusoidFit fit_sinusoid(const std::vector<double>& xs, const std::vector<double>& ys, double lambda,
                                       std::size_t first, std::size_t last);

/// Y = A sin(lambda X + phi) with A and phi refitted by least squares on the
/// training points inside the closed window [x - h, x + h] of each query.
/// Sparse or degenerate windows fall back to a global fit, then to the mean.
class LocalSinusoidModel final : public Model {
public:
    LocalSinusoidModel(const Dataset& train, double lambda, double window);

    [[nodiscard]] double predict(std::span<const double> x) const override;
    [[nodiscard]] std::string describe() const override;

    [[nodiscard]] double lambda() const noexcept { return lambda_; }
    [[nodiscard]] double window() const noexcept { return window_; }

private:
    SortedSample train_;
    double lambda_;
    double window_;
    SinusoidFit global_;
};

/// Nadaraya-Watson smoother with kernel exp(-u^2 / 2), u = (x - X_i) / h.
class NadarayaWatsonModel final : public Model {
public:
    NadarayaWatsonModel(const Dataset& train, double bandwidth);

    [[nodiscard]] double predict(std::span<const double> x) const override;
    [[nodiscard]] std::string describe() const override;

    [[nodiscard]] double bandwidth() const noexcept { return bandwidth_; }

private:
    SortedSample train_;
    double bandwidth_;
};

enum class ModelFamily { Sinusoid, NadarayaWatson };

struct ModelDescriptor {
    ModelFamily family = ModelFamily::NadarayaWatson;
    double bandwidth = 1.0;  ///< NW bandwidth or sinusoid window half-width
    double lambda = 1.0;     ///< sinusoid frequency, unused for NW
};

using BankSpec = std::vector<ModelDescriptor>;

/// lambda in {1..5} x window in {0.5, 1}, lambda-major.
[[nodiscard]] BankSpec parametric_bank_spec();
/// NW bandwidths {0.1, 0.2, 0.4, 0.8, 1.6}.
[[nodiscard]] BankSpec nonparametric_bank_spec();

[[nodiscard]] ModelBank build_model_bank(const BankSpec& spec, const Dataset& train);

}  // namespace lcpms
