#include "lcpms/oracle_ref.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lcpms::oracle {

double naive_quantile(std::span<const WeightedResidual> residuals, double gamma) {
    check_gamma(gamma);
    if (residuals.empty()) throw std::invalid_argument("naive_quantile: no residuals");
    std::vector<Mass> mass;
    Mass total = 0;
    for (const auto& r : residuals) {
        mass.push_back(to_mass(r.weight));
        total += mass.back();
    }
    if (total == 0) {
        for (auto& m : mass) m = 1;
        total = static_cast<Mass>(residuals.size());
    }
    const Mass target = required_mass(gamma, total);
    double best = kInfinity;
    for (const auto& candidate : residuals) {
        const double v = candidate.magnitude;
        if (std::isinf(v)) continue;
        Mass reached = 0;
        for (std::size_t j = 0; j < residuals.size(); ++j) {
            if (residuals[j].magnitude <= v) reached += mass[j];
        }
        if (reached >= target && v < best) best = v;
    }
    return best;
}

Interval oracle_interval(const OracleInstance& inst, std::size_t i, std::size_t k, double gamma) {
    const std::size_t n = inst.n();
    if (i > n) throw std::out_of_range("oracle_interval: index out of range");
    const Model& model = *inst.models.at(k);
    std::vector<WeightedResidual> residuals;
    for (std::size_t j = 0; j <= n; ++j) {
        if (j == i) continue;
        residuals.push_back({std::abs(inst.y(j) - model.predict(inst.x(j))), inst.kernel.weight(inst.x(j), inst.x(i))});
    }
    if (residuals.empty()) throw std::invalid_argument("oracle_interval: need at least two points");
    return {model.predict(inst.x(i)), naive_quantile(residuals, gamma)};
}

std::vector<std::size_t> oracle_minimizers(const OracleInstance& inst, std::size_t i, double gamma) {
    std::vector<double> lengths;
    for (std::size_t k = 0; k < inst.models.size(); ++k) lengths.push_back(oracle_interval(inst, i, k, gamma).length());
    const double shortest = *std::min_element(lengths.begin(), lengths.end());
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < lengths.size(); ++k) {
        if (lengths[k] == shortest) out.push_back(k);
    }
    return out;
}

std::size_t oracle_coverage_count(const OracleInstance& inst, std::size_t g) {
    const double gamma = inst.grid[g];
    std::size_t covered = 0;
    for (std::size_t i = 0; i <= inst.n(); ++i) {
        const std::size_t chosen = oracle_minimizers(inst, i, gamma).front();
        if (oracle_interval(inst, i, chosen, gamma).contains(inst.y(i))) ++covered;
    }
    return covered;
}

OracleGammaHat oracle_gamma_hat(const OracleInstance& inst) {
    const std::size_t needed = required_count(inst.alpha, inst.n());
    for (std::size_t g = inst.grid.size(); g-- > 0;) {
        if (oracle_coverage_count(inst, g) >= needed) return {inst.grid[g], g, false};
    }
    return {inst.grid[0], 0, true};
}

SurrogatePair naive_surrogate_pair(const Dataset& calib, const ModelBank& models, std::size_t i, std::size_t k,
                                   std::span<const double> x_new, double gamma, const KernelSpec& kernel) {
    const Model& model = *models.at(k);
    std::vector<WeightedResidual> lower;
    for (std::size_t j = 0; j < calib.size(); ++j) {
        if (j == i) continue;
        lower.push_back({std::abs(calib.y(j) - model.predict(calib.x(j))), kernel.weight(calib.x(j), calib.x(i))});
    }
    std::vector<WeightedResidual> upper = lower;
    // Perfect conformity: y = f(x_new) gives residual 0. Extreme: residual +inf.
    const double w = kernel.weight(x_new, calib.x(i));
    lower.push_back({std::abs(model.predict(x_new) - model.predict(x_new)), w});
    upper.push_back({kInfinity, w});
    const double center = model.predict(calib.x(i));
    return {Interval(center, naive_quantile(lower, gamma)), Interval(center, naive_quantile(upper, gamma)), i, k, gamma};
}

NaiveResult naive_lcpms(const Dataset& calib, std::span<const double> x_new, double alpha, const GammaGrid& grid,
                        const ModelBank& models, const KernelSpec& kernel) {
    check_alpha(alpha);
    if (models.empty()) throw std::invalid_argument("naive_lcpms: empty model bank");
    const std::size_t n = calib.size();
    const std::size_t num_models = models.size();
    const std::size_t needed = required_count(alpha, n);

    NaiveResult result;
    std::vector<bool> lower_ok(grid.size());
    std::vector<bool> upper_ok(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::size_t count_lower = 0;
        std::size_t count_upper = 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<SurrogatePair> pairs;
            for (std::size_t k = 0; k < num_models; ++k) {
                pairs.push_back(naive_surrogate_pair(calib, models, i, k, x_new, grid[g], kernel));
            }
            double shortest_upper = kInfinity;
            for (const auto& p : pairs) shortest_upper = std::min(shortest_upper, p.upper.length());
            SafeSet set{i, grid[g], {}};
            for (const auto& p : pairs) {
                if (p.lower.length() <= shortest_upper) set.members.push_back(p.k);
            }
            bool in_intersection = true;
            bool in_union = false;
            for (const std::size_t k : set.members) {
                in_intersection = in_intersection && pairs[k].lower.contains(calib.y(i));
                in_union = in_union || pairs[k].upper.contains(calib.y(i));
            }
            count_lower += in_intersection ? 1 : 0;
            count_upper += in_union ? 1 : 0;
            result.safe_sets.push_back(std::move(set));
        }
        // count / (n + 1) >= 1 - alpha, and count / (n + 1) >= 1 - alpha - 1 / (n + 1).
        lower_ok[g] = count_lower >= needed;
        upper_ok[g] = count_upper + 1 >= needed;
    }

    auto& b = result.bounds;
    b.alpha = alpha;
    b.lo_fallback = std::find(lower_ok.begin(), lower_ok.end(), true) == lower_ok.end();
    b.hi_fallback = std::find(upper_ok.begin(), upper_ok.end(), true) == upper_ok.end();
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (lower_ok[g]) b.lo_index = g;
        if (upper_ok[g]) b.hi_index = g;
    }
    b.gamma_lo = grid[b.lo_index];
    b.gamma_hi = grid[b.hi_index];
    result.trace.fallback = b.flagged();

    for (std::size_t g = b.lo_index; g <= b.hi_index; ++g) {
        std::size_t best = 0;
        Interval best_iv;
        for (std::size_t k = 0; k < num_models; ++k) {
            std::vector<WeightedResidual> residuals;
            for (std::size_t j = 0; j < n; ++j) {
                residuals.push_back({std::abs(calib.y(j) - models[k]->predict(calib.x(j))), kernel.weight(calib.x(j), x_new)});
            }
            const Interval iv(models[k]->predict(x_new), naive_quantile(residuals, grid[g]));
            if (k == 0 || iv.length() < best_iv.length()) {
                best = k;
                best_iv = iv;
            }
        }
        result.interval.insert(best_iv);
        result.trace.steps.push_back({grid[g], best, best_iv});
    }
    return result;
}

namespace {

struct SmoothFunction {
    double amplitude;
    double frequency;
    double phase;
    double slope;
    double offset;

    double operator()(double x) const { return amplitude * std::sin(frequency * x + phase) + slope * x + offset; }

    static SmoothFunction draw(Rng& rng) {
        return {rng.uniform(-1.5, 1.5), rng.uniform(0.2, 3.0), rng.uniform(0.0, 6.3), rng.uniform(-0.5, 0.5),
                rng.uniform(-0.3, 0.3)};
    }
};

}  // namespace

OracleInstance random_instance(Rng& rng, const GammaGrid& grid) {
    const auto n = static_cast<std::size_t>(5 + rng.uniform() * 26);
    const auto num_models = static_cast<std::size_t>(1 + rng.uniform() * 4);
    const bool quantized = rng.uniform() < 0.2;
    const auto snap = [&](double v) { return quantized ? std::round(v * 4.0) / 4.0 : v; };

    const SmoothFunction mean = SmoothFunction::draw(rng);
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i <= n; ++i) {
        const double x = snap(rng.uniform(-2.0, 2.0));
        xs.push_back(x);
        ys.push_back(snap(mean(x) + rng.normal()));
    }
    const std::vector<double> x_new{xs.back()};
    const double y_new = ys.back();
    xs.pop_back();
    ys.pop_back();

    ModelBank models;
    for (std::size_t k = 0; k < num_models; ++k) {
        SmoothFunction f = SmoothFunction::draw(rng);
        if (quantized) f = {0.0, 1.0, 0.0, 0.0, std::round(f.offset * 4.0) / 4.0};
        models.push_back(make_function_model([f](std::span<const double> x) { return f(x[0]); },
                                             "smooth_" + std::to_string(k)));
    }
    const KernelFamily family = rng.uniform() < 0.5 ? KernelFamily::Gaussian : KernelFamily::Exponential;
    const double bandwidth = rng.uniform(0.2, 2.0);
    static constexpr double kAlphas[] = {0.05, 0.1, 0.2, 0.3, 0.5};
    const double alpha = kAlphas[static_cast<std::size_t>(rng.uniform() * 5)];

    return OracleInstance{Dataset::from_1d(std::move(xs), std::move(ys)), x_new, y_new, std::move(models),
                          KernelSpec(family, bandwidth), grid, alpha};
}

}  // namespace lcpms::oracle
