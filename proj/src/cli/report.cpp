#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "lcpms/cli.hpp"
#include "lcpms/oracle_ref.hpp"
#include "lcpms/parallel.hpp"

namespace lcpms::cli {

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, 4);
    std::string s(buf, res.ptr);
    if (s.find('.') != std::string::npos) {
        while (s.back() == '0') s.pop_back();
        if (s.back() == '.') s.pop_back();
    }
    if (s == "-0") s = "0";
    return s;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("error while writing '" + path.string() + "'");
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <class T>
T parse_field(std::string_view s, std::size_t line, const char* name) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::invalid_argument("line " + std::to_string(line) + ": bad " + name + " '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

std::string results_csv(std::span<const ResultRow> rows) {
    if (rows.empty()) throw std::invalid_argument("emit_results: no rows");
    std::string out(kResultsHeader);
    out += '\n';
    for (const auto& r : rows) {
        out += std::to_string(r.n) + ',' + format_number(r.sigma) + ',' + format_number(r.localizer_bw) + ',' +
               format_number(r.ensemble_len) + ',' + format_number(r.best_single_len) + ',' +
               format_number(r.ensemble_coverage) + ',' + std::to_string(r.best_single_index) + ',' +
               std::to_string(r.n_reps) + '\n';
    }
    return out;
}

void emit_results(std::span<const ResultRow> rows, const std::filesystem::path& path) {
    write_file(path, results_csv(rows));
}

std::vector<ResultRow> parse_results_csv(std::string_view text) {
    auto lines = split(text, '\n');
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty() || lines.front() != kResultsHeader) throw std::invalid_argument("missing results header");
    std::vector<ResultRow> rows;
    for (std::size_t l = 1; l < lines.size(); ++l) {
        const auto f = split(lines[l], ',');
        if (f.size() != 8) throw std::invalid_argument("line " + std::to_string(l + 1) + ": expected 8 fields");
        ResultRow r;
        r.n = parse_field<std::size_t>(f[0], l + 1, "n");
        r.sigma = parse_field<double>(f[1], l + 1, "sigma");
        r.localizer_bw = parse_field<double>(f[2], l + 1, "localizer_bw");
        r.ensemble_len = parse_field<double>(f[3], l + 1, "ensemble_len");
        r.best_single_len = parse_field<double>(f[4], l + 1, "best_single");
        r.ensemble_coverage = parse_field<double>(f[5], l + 1, "coverage");
        r.best_single_index = parse_field<std::size_t>(f[6], l + 1, "best_single_index");
        r.n_reps = parse_field<std::size_t>(f[7], l + 1, "n_reps");
        rows.push_back(r);
    }
    return rows;
}

std::string format_union(const IntervalUnion& u) {
    std::string out;
    for (const auto& s : u.parts()) {
        if (!out.empty()) out += '|';
        out += format_number(s.lo) + ':' + format_number(s.hi);
    }
    return out;
}

std::string figure_csv(std::span<const PointRecord> records) {
    std::vector<const PointRecord*> sorted;
    for (const auto& r : records) sorted.push_back(&r);
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) { return a->x < b->x; });
    std::string out(kFigureHeader);
    out += '\n';
    for (const auto* r : sorted) {
        out += format_number(r->x) + ',' + format_number(r->true_mean) + ',' + format_union(r->interval) + ',' +
               std::to_string(r->selected_at_hi + 1) + ',' + format_number(r->bounds.gamma_lo) + ',' +
               format_number(r->bounds.gamma_hi) + '\n';
    }
    return out;
}

void emit_figure_data(std::span<const PointRecord> records, const std::filesystem::path& path) {
    write_file(path, figure_csv(records));
}

std::string predict_json(double x, const LcpmsResult& result, const ModelBank& models) {
    using nlohmann::json;
    json parts = json::array();
    for (const auto& s : result.interval.parts()) parts.push_back({{"lo", s.lo}, {"hi", s.hi}});
    json trace = json::array();
    for (const auto& step : result.trace.steps) {
        trace.push_back({{"gamma", step.gamma},
                         {"model", step.model + 1},
                         {"name", models.at(step.model)->describe()},
                         {"lo", step.interval.lo()},
                         {"hi", step.interval.hi()}});
    }
    const json doc = {{"x", x},
                      {"interval", parts},
                      {"measure", result.interval.measure()},
                      {"gamma_lo", result.bounds.gamma_lo},
                      {"gamma_hi", result.bounds.gamma_hi},
                      {"fallback", result.bounds.flagged()},
                      {"trace", trace}};
    return doc.dump(2) + "\n";
}

void run_table_command(const RunConfig& config, const std::filesystem::path& out) {
    const auto rows = run_table(config.table_spec());
    emit_results(rows, out);
}

void run_figure_command(const RunConfig& config, const std::filesystem::path& out) {
    const ReplicationMetrics m = run_replication(config.first_cell(), config.replication);
    emit_figure_data(m.points, out);
}

void run_predict_command(const RunConfig& config, double x, std::ostream& os) {
    if (!std::isfinite(x)) throw std::invalid_argument("x must be finite");
    const ExperimentConfig cell = config.first_cell();
    const DgpSpec spec{cell.family, cell.sigma, cell.n_train == 0 ? cell.n : cell.n_train, cell.n, 1,
                       mix_seed(cell.seed, config.replication)};
    const SampleSplit split = generate(spec);
    const ModelBank bank = build_model_bank(cell.bank, split.train);
    const std::vector<double> xs{x};
    LcpmsResult result;
    if (config.naive) {
        auto naive = oracle::naive_lcpms(split.calib, xs, cell.alpha, cell.grid, bank, cell.kernel);
        result = {std::move(naive.interval), std::move(naive.trace), naive.bounds};
    } else {
        const LcpmsPredictor predictor(split.calib, bank, cell.kernel, cell.grid, Execution::Parallel);
        result = predictor.predict(xs, cell.alpha);
    }
    os << predict_json(x, result, bank);
}

ExitCode run(const Invocation& inv, std::ostream& out, std::ostream& err) {
    try {
        RunConfig config = load_config(inv.config);
        if (config.mode_given && config.mode != inv.mode) {
            throw ConfigError("mode", "config is for '" + std::string(to_string(config.mode)) +
                                          "' but the command is '" + std::string(to_string(inv.mode)) + "'");
        }
        config.mode = inv.mode;
        if (inv.naive) config.naive = true;
        set_threads(config.threads);
        switch (inv.mode) {
            case Mode::Table:
            case Mode::Figure: {
                const std::optional<std::filesystem::path> path =
                    inv.out ? inv.out : (config.output ? std::optional<std::filesystem::path>(*config.output) : std::nullopt);
                if (!path) throw ConfigError("output", "no output path given (use --out)");
                if (inv.mode == Mode::Table) {
                    run_table_command(config, *path);
                } else {
                    run_figure_command(config, *path);
                }
                break;
            }
            case Mode::Predict:
                if (!inv.x) throw ConfigError("x", "predict needs --x");
                run_predict_command(config, *inv.x, out);
                break;
        }
        return ExitCode::Ok;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return ExitCode::Config;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return ExitCode::Io;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return ExitCode::CellFailure;
    }
}

}  // namespace lcpms::cli
