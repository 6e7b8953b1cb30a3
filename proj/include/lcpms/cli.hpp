#pragma once

// Run configuration, CSV/JSON output and the subcommand drivers behind the
// lcpms executable.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lcpms/core_types.hpp"
#include "lcpms/models.hpp"
#include "lcpms/selection.hpp"
#include "lcpms/simulation.hpp"

namespace lcpms::cli {

enum class Mode { Table, Figure, Predict };

[[nodiscard]] std::string_view to_string(Mode mode) noexcept;

/// Exit status of the executable.
enum class ExitCode : int { Ok = 0, Config = 2, CellFailure = 3, Io = 4 };

struct GridSpec {
    double min = 0.01;
    double max = 0.99;
    double step = 0.01;
};

struct RunConfig {
    Mode mode = Mode::Table;
    bool mode_given = false;  ///< mode was stated in the config
    std::string bank_name = "nw5";  ///< parametric10, nw5 or custom
    BankSpec bank = nonparametric_bank_spec();
    DgpFamily dgp = DgpFamily::SineCubed;
    double alpha = 0.1;
    GridSpec grid;
    KernelFamily kernel = KernelFamily::Gaussian;
    std::vector<std::size_t> ns;
    std::vector<double> sigmas;
    std::vector<double> localizer_bws;
    std::size_t n_reps = 100;
    std::size_t n_test = 200;
    std::size_t n_train = 0;  ///< 0: same as the calibration size
    std::uint64_t master_seed = 0;
    std::optional<std::string> output;
    bool naive = false;
    bool uncalibrated_baseline = false;
    int threads = 0;  ///< 0: OpenMP default
    std::size_t replication = 0;  ///< replication shown by figure and predict

    [[nodiscard]] GammaGrid gamma_grid() const;
    [[nodiscard]] TableSpec table_spec() const;
    /// Configuration of the first cell of the matrix.
    [[nodiscard]] ExperimentConfig first_cell() const;
};

/// Rejected configuration. `field()` is the dotted path of the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message);
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[nodiscard]] RunConfig parse_config(std::string_view text);
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

/// Rounded to 4 decimals, trailing zeros dropped: 0.1 -> "0.1", 500 -> "500".
[[nodiscard]] std::string format_number(double value);

inline constexpr std::string_view kResultsHeader =
    "n,sigma,localizer_bw,ensemble_len,best_single,coverage,best_single_index,n_reps";
inline constexpr std::string_view kFigureHeader = "x,true_mean,union_parts,selected_model,gamma_lo,gamma_hi";

[[nodiscard]] std::string results_csv(std::span<const ResultRow> rows);
void emit_results(std::span<const ResultRow> rows, const std::filesystem::path& path);
/// Inverse of results_csv; throws std::invalid_argument on malformed input.
[[nodiscard]] std::vector<ResultRow> parse_results_csv(std::string_view text);

/// `lo:hi` tokens joined by `|`.
[[nodiscard]] std::string format_union(const IntervalUnion& u);
/// Model indices are written 1-based.
[[nodiscard]] std::string figure_csv(std::span<const PointRecord> records);
void emit_figure_data(std::span<const PointRecord> records, const std::filesystem::path& path);

[[nodiscard]] std::string predict_json(double x, const LcpmsResult& result, const ModelBank& models);

/// Subcommand drivers. Exceptions propagate; `run` maps them to exit codes.
void run_table_command(const RunConfig& config, const std::filesystem::path& out);
void run_figure_command(const RunConfig& config, const std::filesystem::path& out);
void run_predict_command(const RunConfig& config, double x, std::ostream& os);

struct Invocation {
    Mode mode = Mode::Table;
    std::filesystem::path config;
    std::optional<std::filesystem::path> out;
    std::optional<double> x;
    bool naive = false;
};

/// Loads the config, applies command-line overrides and dispatches. Errors
/// are reported on `err`.
[[nodiscard]] ExitCode run(const Invocation& inv, std::ostream& out, std::ostream& err);

}  // namespace lcpms::cli
