#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "lcpms/cli.hpp"
#include "lcpms/random.hpp"

namespace lcpms::cli {
namespace {

namespace fs = std::filesystem;

std::string field_of(std::string_view text) {
    try {
        (void)parse_config(text);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "<no error>";
}

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() /
                ("lcpms_cli_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                 ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    [[nodiscard]] fs::path file(const std::string& name) const { return path_ / name; }
    [[nodiscard]] fs::path write(const std::string& name, const std::string& content) const {
        std::ofstream(file(name), std::ios::binary) << content;
        return file(name);
    }

private:
    fs::path path_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

constexpr const char* kSmall = R"({"matrix": {"n": 30, "sigma": 0.1, "localizer_bw": 0.3},
                                   "n_reps": 2, "n_test": 8, "master_seed": 12345})";

TEST(Config, MinimalConfigUsesDefaults) {
    const RunConfig c = parse_config("{}");
    EXPECT_EQ(c.bank_name, "nw5");
    EXPECT_EQ(c.bank.size(), 5u);
    EXPECT_EQ(c.dgp, DgpFamily::SineCubed);
    EXPECT_EQ(c.alpha, 0.1);
    EXPECT_EQ(c.gamma_grid().size(), 99u);
    EXPECT_EQ(c.n_reps, 100u);
    EXPECT_FALSE(c.mode_given);
    // Default matrix of the nonparametric study: 4 sizes x 2 noise levels x 1 bandwidth.
    EXPECT_EQ(c.ns.size() * c.sigmas.size() * c.localizer_bws.size(), 8u);
}

TEST(Config, ParametricDefaults) {
    const RunConfig c = parse_config(R"({"bank": "parametric10"})");
    EXPECT_EQ(c.bank.size(), 10u);
    EXPECT_EQ(c.dgp, DgpFamily::PiecewiseSine);
    EXPECT_EQ(c.ns.size() * c.sigmas.size() * c.localizer_bws.size(), 12u);
}

TEST(Config, ErrorsNameTheField) {
    EXPECT_EQ(field_of(R"({"alpha": 1.5})"), "alpha");
    EXPECT_EQ(field_of(R"({"alpha": "x"})"), "alpha");
    EXPECT_EQ(field_of(R"({"colour": 1})"), "colour");
    EXPECT_EQ(field_of(R"({"matrix": {"foo": 1}})"), "matrix.foo");
    EXPECT_EQ(field_of(R"({"matrix": {"n": [200, 0]}})"), "matrix.n[1]");
    EXPECT_EQ(field_of(R"({"matrix": {"sigma": -0.1}})"), "matrix.sigma");
    EXPECT_EQ(field_of(R"({"grid": {"min": 0}})"), "grid.min");
    EXPECT_EQ(field_of(R"({"grid": {"min": 0.5, "max": 0.2}})"), "grid.max");
    EXPECT_EQ(field_of(R"({"n_reps": 0})"), "n_reps");
    EXPECT_EQ(field_of(R"({"kernel": "box"})"), "kernel");
    EXPECT_EQ(field_of(R"({"bank": "huge"})"), "bank");
    EXPECT_EQ(field_of(R"({"bank": "custom"})"), "models");
    EXPECT_EQ(field_of(R"({"models": []})"), "models");
    EXPECT_EQ(field_of(R"({"bank": "custom", "models": [{"family": "nadaraya_watson", "bandwidth": -1}]})"),
              "models[0].bandwidth");
    EXPECT_EQ(field_of(R"({"bank": "custom", "models": [{"family": "sinusoid", "lambda": 1}]})"), "models[0].window");
    EXPECT_EQ(field_of(R"({"mode": "plot"})"), "mode");
    EXPECT_EQ(field_of(R"({"baseline": "oracle"})"), "baseline");
    EXPECT_EQ(field_of("{not json"), "config");
    EXPECT_EQ(field_of("[1, 2]"), "config");
}

TEST(Config, CustomBankAndOverrides) {
    const RunConfig c = parse_config(R"({"bank": "custom", "dgp": "piecewise_sine",
        "models": [{"family": "sinusoid", "lambda": 3, "window": 0.5}, {"family": "nadaraya_watson", "bandwidth": 0.2}],
        "matrix": {"n": 100, "sigma": [0.1, 0.3], "localizer_bw": 0.5}, "kernel": "exponential",
        "grid": {"min": 0.05, "max": 0.5, "step": 0.05}, "baseline": "uncalibrated", "naive": true})");
    ASSERT_EQ(c.bank.size(), 2u);
    EXPECT_EQ(c.bank[0].family, ModelFamily::Sinusoid);
    EXPECT_EQ(c.bank[0].lambda, 3.0);
    EXPECT_EQ(c.bank[1].bandwidth, 0.2);
    EXPECT_EQ(c.ns, std::vector<std::size_t>{100});
    EXPECT_EQ(c.sigmas.size(), 2u);
    EXPECT_EQ(c.gamma_grid().size(), 10u);
    const TableSpec spec = c.table_spec();
    EXPECT_EQ(spec.base.engine, Engine::Naive);
    EXPECT_TRUE(spec.uncalibrated_baseline);
    EXPECT_EQ(spec.base.kernel.family(), KernelFamily::Exponential);
    const ExperimentConfig cell = c.first_cell();
    EXPECT_EQ(cell.n, 100u);
    EXPECT_EQ(cell.sigma, 0.1);
    EXPECT_EQ(cell.kernel.bandwidth(), 0.5);
}

TEST(Format, ShortestFourDecimalForm) {
    EXPECT_EQ(format_number(0.92454), "0.9245");
    EXPECT_EQ(format_number(1.5), "1.5");
    EXPECT_EQ(format_number(500), "500");
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(0.30000000000000004), "0.3");
    EXPECT_EQ(format_number(-0.00001), "0");
    EXPECT_EQ(format_number(-2.25), "-2.25");
    EXPECT_EQ(format_number(1.99999), "2");
    EXPECT_EQ(format_number(kInfinity), "inf");
    EXPECT_EQ(format_number(-kInfinity), "-inf");
}

TEST(ResultsCsv, LayoutAndRoundTrip) {
    const ResultRow row{500, 0.1, 0.3, 0.92454, 1.32649, 0.9012, 1, 100};
    const std::vector<ResultRow> rows{row};
    EXPECT_EQ(results_csv(rows), std::string(kResultsHeader) + "\n500,0.1,0.3,0.9245,1.3265,0.9012,1,100\n");
    EXPECT_THROW((void)results_csv({}), std::invalid_argument);
    EXPECT_THROW((void)parse_results_csv("n,sigma\n"), std::invalid_argument);
    EXPECT_THROW((void)parse_results_csv(std::string(kResultsHeader) + "\n1,2,3\n"), std::invalid_argument);
}

TEST(ResultsCsv, RoundTripProperty) {
    Rng rng(8);
    for (int t = 0; t < 200; ++t) {
        std::vector<ResultRow> rows;
        const int count = 1 + static_cast<int>(rng.uniform() * 6);
        for (int r = 0; r < count; ++r) {
            rows.push_back({static_cast<std::size_t>(rng.uniform() * 5000), std::round(rng.uniform() * 1e4) / 1e4,
                            std::round(rng.uniform() * 1e4) / 1e4, std::round(rng.uniform(0, 5) * 1e4) / 1e4,
                            std::round(rng.uniform(0, 5) * 1e4) / 1e4, std::round(rng.uniform() * 1e4) / 1e4,
                            1 + static_cast<std::size_t>(rng.uniform() * 10), 1 + static_cast<std::size_t>(rng.uniform() * 100)});
        }
        const std::string csv = results_csv(rows);
        EXPECT_EQ(csv.find('\r'), std::string::npos);
        const auto back = parse_results_csv(csv);
        ASSERT_EQ(back.size(), rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            EXPECT_EQ(back[r].n, rows[r].n);
            EXPECT_NEAR(back[r].sigma, rows[r].sigma, 1e-12);
            EXPECT_NEAR(back[r].ensemble_len, rows[r].ensemble_len, 1e-12);
            EXPECT_NEAR(back[r].best_single_len, rows[r].best_single_len, 1e-12);
            EXPECT_EQ(back[r].best_single_index, rows[r].best_single_index);
        }
        EXPECT_EQ(results_csv(back), csv);
    }
}

TEST(FigureCsv, UnionTokensAndSorting) {
    IntervalUnion u;
    u.insert(Segment{-0.5, 0.25});
    u.insert(Segment{1.0, 2.0});
    EXPECT_EQ(format_union(u), "-0.5:0.25|1:2");
    PointRecord a;
    a.x = 2.0;
    a.true_mean = std::sin(8.0);
    a.interval = u;
    a.selected_at_hi = 0;
    a.bounds.gamma_lo = 0.05;
    a.bounds.gamma_hi = 0.12;
    PointRecord b = a;
    b.x = 1.0;
    b.selected_at_hi = 3;
    const std::vector<PointRecord> recs{a, b};
    const std::string csv = figure_csv(recs);
    const std::string expected = std::string(kFigureHeader) + "\n1,0.9894,-0.5:0.25|1:2,4,0.05,0.12\n" +
                                 "2,0.9894,-0.5:0.25|1:2,1,0.05,0.12\n";
    EXPECT_EQ(csv, expected);
}

TEST(Emit, UnwritablePathIsIoError) {
    const ResultRow row{1, 0.1, 0.3, 1, 1, 1, 1, 1};
    const std::vector<ResultRow> rows{row};
    EXPECT_THROW(emit_results(rows, "/nonexistent_dir_lcpms/x.csv"), IoError);
    EXPECT_THROW((void)load_config("/nonexistent_dir_lcpms/c.json"), IoError);
}

TEST(Run, ExitCodes) {
    TempDir dir;
    std::ostringstream out;
    std::ostringstream err;
    const fs::path good = dir.write("good.json", kSmall);
    Invocation inv{Mode::Table, good, dir.file("t.csv"), std::nullopt, false};
    EXPECT_EQ(run(inv, out, err), ExitCode::Ok);
    EXPECT_TRUE(fs::exists(dir.file("t.csv")));

    inv.config = dir.write("bad.json", R"({"alpha": 1.5})");
    err.str("");
    EXPECT_EQ(run(inv, out, err), ExitCode::Config);
    EXPECT_NE(err.str().find("alpha"), std::string::npos);

    inv.config = dir.write("mode.json", R"({"mode": "figure"})");
    EXPECT_EQ(run(inv, out, err), ExitCode::Config);

    inv.config = dir.file("missing.json");
    EXPECT_EQ(run(inv, out, err), ExitCode::Io);

    inv.config = good;
    inv.out = "/nonexistent_dir_lcpms/t.csv";
    EXPECT_EQ(run(inv, out, err), ExitCode::Io);

    inv.out.reset();
    EXPECT_EQ(run(inv, out, err), ExitCode::Config);

    Invocation predict{Mode::Predict, good, std::nullopt, std::nullopt, false};
    EXPECT_EQ(run(predict, out, err), ExitCode::Config);  // no --x
}

TEST(Run, CellFailureExitCode) {
    // Exit code 3 covers any failure while computing a cell; a non-finite x
    // in predict is the simplest way to trigger one.
    TempDir dir;
    std::ostringstream out;
    std::ostringstream err;
    Invocation inv{Mode::Predict, dir.write("c.json", kSmall), std::nullopt, kInfinity, false};
    EXPECT_EQ(run(inv, out, err), ExitCode::CellFailure);
}

TEST(Run, TableIsDeterministicAndNaiveAgrees) {
    TempDir dir;
    std::ostringstream out;
    std::ostringstream err;
    const fs::path cfg = dir.write("c.json", kSmall);
    Invocation inv{Mode::Table, cfg, dir.file("a.csv"), std::nullopt, false};
    ASSERT_EQ(run(inv, out, err), ExitCode::Ok);
    inv.out = dir.file("b.csv");
    ASSERT_EQ(run(inv, out, err), ExitCode::Ok);
    inv.out = dir.file("c.csv");
    inv.naive = true;
    ASSERT_EQ(run(inv, out, err), ExitCode::Ok);
    const std::string a = slurp(dir.file("a.csv"));
    EXPECT_EQ(a, slurp(dir.file("b.csv")));
    EXPECT_EQ(a, slurp(dir.file("c.csv")));
    EXPECT_EQ(a.rfind(std::string(kResultsHeader) + "\n30,0.1,0.3,", 0), 0u);
}

TEST(Run, FigureWritesOneRowPerTestPoint) {
    TempDir dir;
    std::ostringstream out;
    std::ostringstream err;
    Invocation inv{Mode::Figure, dir.write("c.json", kSmall), dir.file("fig.csv"), std::nullopt, false};
    ASSERT_EQ(run(inv, out, err), ExitCode::Ok);
    const std::string csv = slurp(dir.file("fig.csv"));
    EXPECT_EQ(csv.rfind(std::string(kFigureHeader) + "\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);
}

TEST(Run, PredictPrintsJson) {
    TempDir dir;
    std::ostringstream out;
    std::ostringstream err;
    Invocation inv{Mode::Predict, dir.write("c.json", kSmall), std::nullopt, 1.5, false};
    ASSERT_EQ(run(inv, out, err), ExitCode::Ok) << err.str();
    const auto doc = nlohmann::json::parse(out.str());
    EXPECT_EQ(doc["x"].get<double>(), 1.5);
    ASSERT_TRUE(doc["interval"].is_array());
    ASSERT_FALSE(doc["interval"].empty());
    EXPECT_LE(doc["gamma_lo"].get<double>(), doc["gamma_hi"].get<double>());
    for (const auto& step : doc["trace"]) {
        EXPECT_GE(step["model"].get<int>(), 1);
        EXPECT_LE(step["model"].get<int>(), 5);
    }
    std::ostringstream naive_out;
    inv.naive = true;
    ASSERT_EQ(run(inv, naive_out, err), ExitCode::Ok);
    EXPECT_EQ(out.str(), naive_out.str());
}

TEST(PredictJson, InfinityBecomesNull) {
    LcpmsResult r;
    r.interval.insert(Interval(0.0, kInfinity));
    r.trace.steps.push_back({0.5, 0, Interval(0.0, kInfinity)});
    r.bounds.gamma_lo = r.bounds.gamma_hi = 0.5;
    const ModelBank bank{make_function_model([](std::span<const double>) { return 0.0; }, "zero")};
    const auto doc = nlohmann::json::parse(predict_json(0.0, r, bank));
    EXPECT_TRUE(doc["interval"][0]["lo"].is_null());
    EXPECT_TRUE(doc["measure"].is_null());
    EXPECT_EQ(doc["trace"][0]["name"], "zero");
}

}  // namespace
}  // namespace lcpms::cli
