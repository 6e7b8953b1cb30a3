#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lcpms/oracle_ref.hpp"
#include "lcpms/random.hpp"
#include "lcpms/selection.hpp"

namespace lcpms::oracle {
namespace {

std::shared_ptr<const Model> constant(double c) {
    return make_function_model([c](std::span<const double>) { return c; }, "const");
}

TEST(NaiveQuantile, Examples) {
    const std::vector<WeightedResidual> r{{1.0, 1.0}, {2.0, 1.0}, {3.0, 1.0}, {4.0, 1.0}};
    EXPECT_EQ(naive_quantile(r, 0.5), 2.0);   // mass 2/4 reaches 1 - 0.5
    EXPECT_EQ(naive_quantile(r, 0.25), 3.0);
    EXPECT_EQ(naive_quantile(r, 0.01), 4.0);
    const std::vector<WeightedResidual> heavy{{1.0, 0.75}, {5.0, 0.25}};
    EXPECT_EQ(naive_quantile(heavy, 0.25), 1.0);
    EXPECT_EQ(naive_quantile(heavy, 0.2), 5.0);
    const std::vector<WeightedResidual> inf{{1.0, 1.0}, {kInfinity, 1.0}};
    EXPECT_EQ(naive_quantile(inf, 0.5), 1.0);
    EXPECT_TRUE(std::isinf(naive_quantile(inf, 0.4)));
    EXPECT_THROW((void)naive_quantile({}, 0.5), std::invalid_argument);
    EXPECT_THROW((void)naive_quantile(r, 1.0), std::invalid_argument);
}

// When the held-out response equals the model's prediction the oracle
// interval is exactly the lower surrogate for that model.
TEST(OracleInterval, PerfectConformityMatchesLowerSurrogate) {
    Rng rng(31);
    for (int t = 0; t < 200; ++t) {
        OracleInstance inst = random_instance(rng);
        const std::size_t k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(inst.models.size()));
        inst.y_new = inst.models[k]->predict(inst.x_new);
        const double gamma = inst.grid[static_cast<std::size_t>(rng.uniform() * 99)];
        for (std::size_t i = 0; i < inst.n(); ++i) {
            const auto pair = naive_surrogate_pair(inst.calib, inst.models, i, k, inst.x_new, gamma, inst.kernel);
            EXPECT_EQ(oracle_interval(inst, i, k, gamma), pair.lower);
        }
    }
}

TEST(OracleInterval, ExtremeResponseMatchesUpperSurrogate) {
    Rng rng(32);
    for (int t = 0; t < 200; ++t) {
        OracleInstance inst = random_instance(rng);
        inst.y_new = 1e12;
        const double gamma = inst.grid[static_cast<std::size_t>(rng.uniform() * 99)];
        for (std::size_t k = 0; k < inst.models.size(); ++k) {
            for (std::size_t i = 0; i < inst.n(); ++i) {
                const auto pair = naive_surrogate_pair(inst.calib, inst.models, i, k, inst.x_new, gamma, inst.kernel);
                const Interval iv = oracle_interval(inst, i, k, gamma);
                // A finite but enormous residual is reached exactly when +inf would be.
                if (std::isinf(pair.upper.half_width())) {
                    EXPECT_GE(iv.half_width(), 1e11);
                } else {
                    EXPECT_EQ(iv, pair.upper);
                }
            }
        }
    }
}

TEST(OracleGammaHat, SingleLevelGrid) {
    Rng rng(33);
    const GammaGrid grid({0.3});
    for (int t = 0; t < 50; ++t) {
        const OracleInstance inst = random_instance(rng, grid);
        const OracleGammaHat g = oracle_gamma_hat(inst);
        EXPECT_EQ(g.gamma, 0.3);
        EXPECT_EQ(g.index, 0u);
    }
}

TEST(OracleGammaHat, ExactFitReachesTopOfGrid) {
    // Every response is fitted exactly by model 0: all residuals vanish and
    // every point is covered at every level.
    std::vector<double> xs;
    std::vector<double> ys;
    for (int i = 0; i < 12; ++i) {
        xs.push_back(0.1 * i);
        ys.push_back(2.0);
    }
    OracleInstance inst{Dataset::from_1d(xs, ys), {0.55}, 2.0, {constant(2.0), constant(5.0)},
                        KernelSpec(KernelFamily::Gaussian, 0.5), GammaGrid::standard(), 0.1};
    const OracleGammaHat g = oracle_gamma_hat(inst);
    EXPECT_EQ(g.gamma, 0.99);
    EXPECT_FALSE(g.fallback);
    EXPECT_EQ(oracle_minimizers(inst, 3, 0.5), std::vector<std::size_t>{0});
}

TEST(OracleMinimizers, TiesReportEveryMinimizer) {
    OracleInstance inst{Dataset::from_1d({0.0, 1.0, 2.0}, {1.0, -1.0, 1.0}), {0.5}, 0.0,
                        {constant(0.0), constant(0.0), constant(3.0)}, KernelSpec(KernelFamily::Gaussian, 1.0),
                        GammaGrid::standard(), 0.1};
    EXPECT_EQ(oracle_minimizers(inst, 1, 0.5), (std::vector<std::size_t>{0, 1}));
}

// Relabelling the calibration points leaves the oracle level unchanged.
TEST(OracleGammaHat, InvariantUnderPermutation) {
    Rng rng(34);
    for (int t = 0; t < 60; ++t) {
        const OracleInstance inst = random_instance(rng);
        std::vector<std::size_t> perm(inst.n());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        for (std::size_t i = perm.size(); i > 1; --i) {
            std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.uniform() * static_cast<double>(i))]);
        }
        std::vector<double> xs;
        std::vector<double> ys;
        for (const std::size_t p : perm) {
            xs.push_back(inst.calib.x(p)[0]);
            ys.push_back(inst.calib.y(p));
        }
        OracleInstance shuffled = inst;
        shuffled.calib = Dataset::from_1d(xs, ys);
        const OracleGammaHat a = oracle_gamma_hat(inst);
        const OracleGammaHat b = oracle_gamma_hat(shuffled);
        EXPECT_EQ(a.index, b.index);
        EXPECT_EQ(a.fallback, b.fallback);
        const auto na = naive_lcpms(inst.calib, inst.x_new, inst.alpha, inst.grid, inst.models, inst.kernel);
        const auto nb = naive_lcpms(shuffled.calib, shuffled.x_new, shuffled.alpha, shuffled.grid, shuffled.models,
                                    shuffled.kernel);
        EXPECT_EQ(na.bounds, nb.bounds);
        EXPECT_EQ(na.interval, nb.interval);
    }
}

TEST(RandomInstance, RangesAndDeterminism) {
    Rng a(77);
    Rng b(77);
    for (int t = 0; t < 200; ++t) {
        const OracleInstance x = random_instance(a);
        const OracleInstance y = random_instance(b);
        EXPECT_GE(x.n(), 5u);
        EXPECT_LE(x.n(), 30u);
        EXPECT_GE(x.models.size(), 1u);
        EXPECT_LE(x.models.size(), 4u);
        EXPECT_GT(x.alpha, 0.0);
        EXPECT_LT(x.alpha, 1.0);
        ASSERT_EQ(x.n(), y.n());
        for (std::size_t i = 0; i < x.n(); ++i) {
            EXPECT_EQ(x.calib.x(i)[0], y.calib.x(i)[0]);
            EXPECT_EQ(x.calib.y(i), y.calib.y(i));
        }
        EXPECT_EQ(x.y_new, y.y_new);
        EXPECT_EQ(x.models.back()->predict(x.x_new), y.models.back()->predict(y.x_new));
    }
}

// Nesting, safe-set soundness and the level sandwich on a smaller sample;
// the acceptance run repeats this on 1000 instances.
TEST(ProofInvariants, HoldOnRandomInstances) {
    Rng rng(2025);
    for (int t = 0; t < 150; ++t) {
        const OracleInstance inst = random_instance(rng);
        const LcpmsPredictor predictor(inst.calib, inst.models, inst.kernel, inst.grid, Execution::Serial);
        const PointAnalysis analysis = predictor.analyze(inst.x_new);
        for (std::size_t g = 0; g < inst.grid.size(); g += 7) {
            const double gamma = inst.grid[g];
            for (std::size_t i = 0; i < inst.n(); ++i) {
                const auto pairs = predictor.surrogate_pairs(analysis, i, g);
                for (std::size_t k = 0; k < inst.models.size(); ++k) {
                    const double q = oracle_interval(inst, i, k, gamma).half_width();
                    EXPECT_LE(pairs[k].lower.half_width(), q);
                    EXPECT_LE(q, pairs[k].upper.half_width());
                }
                const SafeSet safe = safe_index_set(pairs);
                for (const std::size_t k : oracle_minimizers(inst, i, gamma)) {
                    EXPECT_TRUE(std::binary_search(safe.members.begin(), safe.members.end(), k));
                }
            }
        }
        const GammaBounds b = predictor.predict(inst.x_new, inst.alpha).bounds;
        const OracleGammaHat oracle = oracle_gamma_hat(inst);
        if (!b.lo_fallback) { EXPECT_LE(b.gamma_lo, oracle.gamma); }
        EXPECT_LE(oracle.gamma, b.gamma_hi);
    }
}

}  // namespace
}  // namespace lcpms::oracle
