#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lcpms/core_types.hpp"
#include "lcpms/models.hpp"
#include "lcpms/random.hpp"
#include "lcpms/selection.hpp"

namespace lcpms {

enum class DgpFamily { PiecewiseSine, SineCubed };

[[nodiscard]] std::string_view to_string(DgpFamily family) noexcept;
[[nodiscard]] DgpFamily dgp_family_from_string(std::string_view name);

/// sin(5x) on [-5, 0), 2 sin(3x) on [0, 5]; or sin(x^3) on [0, 3].
[[nodiscard]] double true_mean(DgpFamily family, double x) noexcept;
[[nodiscard]] std::pair<double, double> covariate_domain(DgpFamily family) noexcept;

struct DgpSpec {
    DgpFamily family = DgpFamily::SineCubed;
    double sigma = 0.1;
    std::size_t n_train = 200;
    std::size_t n_calib = 200;
    std::size_t n_test = 200;
    std::uint64_t seed = 0;
};

struct SampleSplit {
    Dataset train;
    Dataset calib;
    Dataset test;
};

/// X uniform on the family's domain, Y = mean(X) + N(0, sigma^2). Train,
/// calibration and test samples are drawn in that order from one stream.
[[nodiscard]] SampleSplit generate(const DgpSpec& spec);
[[nodiscard]] SampleSplit gen_piecewise_sine(const DgpSpec& spec);
[[nodiscard]] SampleSplit gen_sine_cubed(const DgpSpec& spec);

enum class Engine { Optimized, Naive };

struct ExperimentConfig {
    DgpFamily family = DgpFamily::SineCubed;
    BankSpec bank = nonparametric_bank_spec();
    std::size_t n = 200;        ///< calibration size
    std::size_t n_train = 0;    ///< 0 means "same as n"
    std::size_t n_test = 200;
    double sigma = 0.1;
    KernelSpec kernel{KernelFamily::Gaussian, 0.3};
    double alpha = 0.1;
    GammaGrid grid = GammaGrid::standard();
    std::size_t n_reps = 100;
    std::uint64_t seed = 0;     ///< seed of this cell; replications derive from it
    Engine engine = Engine::Optimized;
    Execution execution = Execution::Parallel;
    bool keep_traces = false;
};

struct PointRecord {
    double x = 0.0;
    double y = 0.0;
    double true_mean = 0.0;
    IntervalUnion interval;
    GammaBounds bounds;
    std::size_t selected_at_hi = 0;  ///< model chosen at gamma_hi
    std::size_t modal_selected = 0;  ///< most frequent choice over the band, ties to the lower index
    bool covered = false;
    std::vector<SelectionStep> trace;  ///< filled when keep_traces is set
};

struct ReplicationMetrics {
    double ensemble_len = 0.0;
    double ensemble_coverage = 0.0;
    std::size_t fallback_points = 0;
    std::vector<double> single_len;        ///< calibrated single-model pipeline, per model
    std::vector<double> single_coverage;
    std::vector<double> uncalibrated_len;  ///< single-model interval at gamma = alpha, per model
    std::vector<double> uncalibrated_coverage;
    std::vector<PointRecord> points;
};

[[nodiscard]] ReplicationMetrics run_replication(const ExperimentConfig& config, std::size_t replication);

struct BaselineChoice {
    std::size_t index = 0;  ///< 0-based bank index
    double mean_len = 0.0;
    double coverage = 0.0;
};

/// Single model with the shortest mean interval length across all
/// replications and test points. `uncalibrated` picks the gamma = alpha
/// variant instead of the calibrated single-model pipeline.
[[nodiscard]] BaselineChoice choose_best_single(const std::vector<ReplicationMetrics>& reps, bool uncalibrated = false);
[[nodiscard]] BaselineChoice best_single_baseline(const ExperimentConfig& config, bool uncalibrated = false);

struct ResultRow {
    std::size_t n = 0;
    double sigma = 0.0;
    double localizer_bw = 0.0;
    double ensemble_len = 0.0;
    double best_single_len = 0.0;
    double ensemble_coverage = 0.0;
    std::size_t best_single_index = 0;  ///< 1-based, as reported in tables
    std::size_t n_reps = 0;

    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct CellResult {
    ResultRow row;
    BaselineChoice best_single;
    std::vector<double> replication_coverage;
    std::size_t fallback_points = 0;
};

[[nodiscard]] CellResult run_cell(const ExperimentConfig& config, bool uncalibrated_baseline = false);

struct TableSpec {
    ExperimentConfig base;
    std::vector<std::size_t> ns;
    std::vector<double> sigmas;
    std::vector<double> localizer_bws;
    std::uint64_t master_seed = 0;
    bool uncalibrated_baseline = false;
};

/// Seed of cell (n, sigma, bw): the master seed hashed with the cell coordinates.
[[nodiscard]] std::uint64_t cell_seed(std::uint64_t master, std::size_t n, double sigma, double bw) noexcept;
[[nodiscard]] ExperimentConfig cell_config(const TableSpec& spec, std::size_t n, double sigma, double bw);

class CellFailure : public std::runtime_error {
public:
    CellFailure(std::size_t n, double sigma, double bw, const std::string& what);
};

/// One row per (n, sigma, bw) cell, sorted by (n, sigma, bw).
[[nodiscard]] std::vector<ResultRow> run_table(const TableSpec& spec);

}  // namespace lcpms
