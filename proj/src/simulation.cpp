#include "lcpms/simulation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <string>

#include "lcpms/oracle_ref.hpp"
#include "lcpms/parallel.hpp"

namespace lcpms {

std::string_view to_string(DgpFamily family) noexcept {
    switch (family) {
        case DgpFamily::PiecewiseSine: return "piecewise_sine";
        case DgpFamily::SineCubed: return "sine_cubed";
    }
    return "unknown";
}

DgpFamily dgp_family_from_string(std::string_view name) {
    if (name == "piecewise_sine") return DgpFamily::PiecewiseSine;
    if (name == "sine_cubed") return DgpFamily::SineCubed;
    throw std::invalid_argument("unknown data generating process '" + std::string(name) + "'");
}

double true_mean(DgpFamily family, double x) noexcept {
    switch (family) {
        case DgpFamily::PiecewiseSine: return x < 0.0 ? std::sin(5.0 * x) : 2.0 * std::sin(3.0 * x);
        case DgpFamily::SineCubed: return std::sin(x * x * x);
    }
    return 0.0;
}

std::pair<double, double> covariate_domain(DgpFamily family) noexcept {
    switch (family) {
        case DgpFamily::PiecewiseSine: return {-5.0, 5.0};
        case DgpFamily::SineCubed: return {0.0, 3.0};
    }
    return {0.0, 1.0};
}

namespace {

Dataset draw(DgpFamily family, double sigma, std::size_t count, Rng& rng) {
    const auto [lo, hi] = covariate_domain(family);
    std::vector<double> xs(count);
    std::vector<double> ys(count);
    for (std::size_t i = 0; i < count; ++i) {
        xs[i] = rng.uniform(lo, hi);
        ys[i] = true_mean(family, xs[i]) + sigma * rng.normal();
    }
    return Dataset::from_1d(std::move(xs), std::move(ys));
}

}  // namespace

SampleSplit generate(const DgpSpec& spec) {
    if (!(spec.sigma >= 0.0)) throw std::invalid_argument("generate: sigma must be nonnegative");
    Rng rng(spec.seed);
    Dataset train = draw(spec.family, spec.sigma, spec.n_train, rng);
    Dataset calib = draw(spec.family, spec.sigma, spec.n_calib, rng);
    Dataset test = draw(spec.family, spec.sigma, spec.n_test, rng);
    return {std::move(train), std::move(calib), std::move(test)};
}

SampleSplit gen_piecewise_sine(const DgpSpec& spec) {
    if (spec.family != DgpFamily::PiecewiseSine) throw std::invalid_argument("gen_piecewise_sine: wrong family");
    return generate(spec);
}

SampleSplit gen_sine_cubed(const DgpSpec& spec) {
    if (spec.family != DgpFamily::SineCubed) throw std::invalid_argument("gen_sine_cubed: wrong family");
    return generate(spec);
}

namespace {

struct PointOutcome {
    PointRecord record;
    std::vector<double> single_len;
    std::vector<char> single_covered;
    std::vector<double> uncalibrated_len;
    std::vector<char> uncalibrated_covered;
};

void fill_record(PointRecord& rec, const IntervalUnion& interval, const SelectionTrace& trace,
                 const GammaBounds& bounds, std::size_t num_models, bool keep_trace) {
    rec.interval = interval;
    rec.bounds = bounds;
    rec.covered = interval.contains(rec.y);
    rec.selected_at_hi = trace.steps.back().model;
    std::vector<std::size_t> votes(num_models, 0);
    for (const auto& s : trace.steps) ++votes[s.model];
    rec.modal_selected = static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    if (keep_trace) rec.trace = trace.steps;
}

PointOutcome evaluate_optimized(const LcpmsPredictor& predictor, const ExperimentConfig& config, PointRecord rec) {
    const std::size_t num_models = predictor.num_models();
    const std::vector<double> x{rec.x};
    const PointAnalysis analysis = predictor.analyze(x);
    const LcpmsResult ensemble = predictor.select(analysis, config.alpha);

    PointOutcome out;
    fill_record(rec, ensemble.interval, ensemble.trace, ensemble.bounds, num_models, config.keep_traces);
    for (std::size_t k = 0; k < num_models; ++k) {
        const std::size_t only[] = {k};
        const LcpmsResult single = predictor.select(analysis, config.alpha, only);
        out.single_len.push_back(single.interval.measure());
        out.single_covered.push_back(single.interval.contains(rec.y) ? 1 : 0);
    }
    const std::vector<double> half = predictor.localized_half_widths(x, config.alpha);
    for (std::size_t k = 0; k < num_models; ++k) {
        const Interval iv(analysis.prediction(k), half[k]);
        out.uncalibrated_len.push_back(iv.length());
        out.uncalibrated_covered.push_back(iv.contains(rec.y) ? 1 : 0);
    }
    out.record = std::move(rec);
    return out;
}

PointOutcome evaluate_naive(const Dataset& calib, const ModelBank& bank, const ExperimentConfig& config,
                            PointRecord rec) {
    const std::size_t num_models = bank.size();
    const std::vector<double> x{rec.x};
    const oracle::NaiveResult ensemble =
        oracle::naive_lcpms(calib, x, config.alpha, config.grid, bank, config.kernel);

    PointOutcome out;
    fill_record(rec, ensemble.interval, ensemble.trace, ensemble.bounds, num_models, config.keep_traces);
    for (std::size_t k = 0; k < num_models; ++k) {
        const ModelBank only{bank[k]};
        const oracle::NaiveResult single = oracle::naive_lcpms(calib, x, config.alpha, config.grid, only, config.kernel);
        out.single_len.push_back(single.interval.measure());
        out.single_covered.push_back(single.interval.contains(rec.y) ? 1 : 0);

        std::vector<WeightedResidual> residuals;
        for (std::size_t j = 0; j < calib.size(); ++j) {
            residuals.push_back({std::abs(calib.y(j) - bank[k]->predict(calib.x(j))), config.kernel.weight(calib.x(j), x)});
        }
        const Interval iv(bank[k]->predict(x), oracle::naive_quantile(residuals, config.alpha));
        out.uncalibrated_len.push_back(iv.length());
        out.uncalibrated_covered.push_back(iv.contains(rec.y) ? 1 : 0);
    }
    out.record = std::move(rec);
    return out;
}

}  // namespace

ReplicationMetrics run_replication(const ExperimentConfig& config, std::size_t replication) {
    check_alpha(config.alpha);
    if (config.n == 0 || config.n_test == 0) throw std::invalid_argument("run_replication: empty sample size");
    const DgpSpec spec{config.family, config.sigma, config.n_train == 0 ? config.n : config.n_train, config.n,
                       config.n_test, mix_seed(config.seed, replication)};
    const SampleSplit split = generate(spec);
    const ModelBank bank = build_model_bank(config.bank, split.train);
    const std::size_t num_models = bank.size();
    const std::size_t n_test = split.test.size();
    const bool parallel = config.execution == Execution::Parallel;

    std::vector<PointOutcome> outcomes(n_test);
    const auto seed_record = [&](std::size_t t) {
        PointRecord rec;
        rec.x = split.test.x(t)[0];
        rec.y = split.test.y(t);
        rec.true_mean = true_mean(config.family, rec.x);
        return rec;
    };
    if (config.engine == Engine::Optimized) {
        const LcpmsPredictor predictor(split.calib, bank, config.kernel, config.grid, config.execution);
        parallel_for(n_test, parallel,
                     [&](std::size_t t) { outcomes[t] = evaluate_optimized(predictor, config, seed_record(t)); });
    } else {
        parallel_for(n_test, parallel,
                     [&](std::size_t t) { outcomes[t] = evaluate_naive(split.calib, bank, config, seed_record(t)); });
    }

    ReplicationMetrics m;
    m.single_len.assign(num_models, 0.0);
    m.single_coverage.assign(num_models, 0.0);
    m.uncalibrated_len.assign(num_models, 0.0);
    m.uncalibrated_coverage.assign(num_models, 0.0);
    std::size_t covered = 0;
    for (auto& o : outcomes) {
        m.ensemble_len += o.record.interval.measure();
        covered += o.record.covered ? 1 : 0;
        m.fallback_points += o.record.bounds.flagged() ? 1 : 0;
        for (std::size_t k = 0; k < num_models; ++k) {
            m.single_len[k] += o.single_len[k];
            m.single_coverage[k] += o.single_covered[k];
            m.uncalibrated_len[k] += o.uncalibrated_len[k];
            m.uncalibrated_coverage[k] += o.uncalibrated_covered[k];
        }
        m.points.push_back(std::move(o.record));
    }
    const auto count = static_cast<double>(n_test);
    m.ensemble_len /= count;
    m.ensemble_coverage = static_cast<double>(covered) / count;
    for (std::size_t k = 0; k < num_models; ++k) {
        m.single_len[k] /= count;
        m.single_coverage[k] /= count;
        m.uncalibrated_len[k] /= count;
        m.uncalibrated_coverage[k] /= count;
    }
    return m;
}

BaselineChoice choose_best_single(const std::vector<ReplicationMetrics>& reps, bool uncalibrated) {
    if (reps.empty()) throw std::invalid_argument("choose_best_single: no replications");
    const std::size_t num_models = reps.front().single_len.size();
    BaselineChoice best;
    for (std::size_t k = 0; k < num_models; ++k) {
        double len = 0.0;
        double cov = 0.0;
        for (const auto& r : reps) {
            len += uncalibrated ? r.uncalibrated_len[k] : r.single_len[k];
            cov += uncalibrated ? r.uncalibrated_coverage[k] : r.single_coverage[k];
        }
        len /= static_cast<double>(reps.size());
        cov /= static_cast<double>(reps.size());
        if (k == 0 || len < best.mean_len) best = {k, len, cov};
    }
    return best;
}

namespace {

std::vector<ReplicationMetrics> run_replications(const ExperimentConfig& config) {
    if (config.n_reps == 0) throw std::invalid_argument("n_reps must be positive");
    std::vector<ReplicationMetrics> reps;
    reps.reserve(config.n_reps);
    for (std::size_t r = 0; r < config.n_reps; ++r) {
        reps.push_back(run_replication(config, r));
        reps.back().points.clear();
    }
    return reps;
}

}  // namespace

BaselineChoice best_single_baseline(const ExperimentConfig& config, bool uncalibrated) {
    return choose_best_single(run_replications(config), uncalibrated);
}

CellResult run_cell(const ExperimentConfig& config, bool uncalibrated_baseline) {
    const auto reps = run_replications(config);
    CellResult cell;
    cell.best_single = choose_best_single(reps, uncalibrated_baseline);
    double len = 0.0;
    double cov = 0.0;
    for (const auto& r : reps) {
        len += r.ensemble_len;
        cov += r.ensemble_coverage;
        cell.replication_coverage.push_back(r.ensemble_coverage);
        cell.fallback_points += r.fallback_points;
    }
    const auto count = static_cast<double>(reps.size());
    cell.row = {config.n,
                config.sigma,
                config.kernel.bandwidth(),
                len / count,
                cell.best_single.mean_len,
                cov / count,
                cell.best_single.index + 1,
                reps.size()};
    return cell;
}

std::uint64_t cell_seed(std::uint64_t master, std::size_t n, double sigma, double bw) noexcept {
    std::uint64_t s = mix_seed(master, n);
    s = mix_seed(s, std::bit_cast<std::uint64_t>(sigma));
    return mix_seed(s, std::bit_cast<std::uint64_t>(bw));
}

ExperimentConfig cell_config(const TableSpec& spec, std::size_t n, double sigma, double bw) {
    ExperimentConfig c = spec.base;
    c.n = n;
    c.sigma = sigma;
    c.kernel = KernelSpec(spec.base.kernel.family(), bw);
    c.seed = cell_seed(spec.master_seed, n, sigma, bw);
    return c;
}

namespace {

std::string describe_cell(std::size_t n, double sigma, double bw, const std::string& what) {
    std::ostringstream os;
    os << "cell (n=" << n << ", sigma=" << sigma << ", localizer_bw=" << bw << ") failed: " << what;
    return os.str();
}

}  // namespace

CellFailure::CellFailure(std::size_t n, double sigma, double bw, const std::string& what)
    : std::runtime_error(describe_cell(n, sigma, bw, what)) {}

std::vector<ResultRow> run_table(const TableSpec& spec) {
    if (spec.ns.empty() || spec.sigmas.empty() || spec.localizer_bws.empty()) {
        throw std::invalid_argument("run_table: empty configuration matrix");
    }
    std::vector<ResultRow> rows;
    for (const std::size_t n : spec.ns) {
        for (const double sigma : spec.sigmas) {
            for (const double bw : spec.localizer_bws) {
                try {
                    rows.push_back(run_cell(cell_config(spec, n, sigma, bw), spec.uncalibrated_baseline).row);
                } catch (const std::exception& e) {
                    throw CellFailure(n, sigma, bw, e.what());
                }
            }
        }
    }
    std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        if (a.n != b.n) return a.n < b.n;
        if (a.sigma != b.sigma) return a.sigma < b.sigma;
        return a.localizer_bw < b.localizer_bw;
    });
    return rows;
}

}  // namespace lcpms
