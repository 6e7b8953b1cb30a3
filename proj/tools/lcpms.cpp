#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lcpms/cli.hpp"

int main(int argc, char** argv) {
    using lcpms::cli::ExitCode;
    using lcpms::cli::Mode;

    CLI::App app{"Localized conformal model selection"};
    app.require_subcommand(1);

    lcpms::cli::Invocation inv;
    std::string config;
    std::string out;
    double x = 0.0;

    auto* table = app.add_subcommand("table", "Run an experiment matrix and write the results CSV");
    auto* figure = app.add_subcommand("figure", "Write per-test-point intervals and selections for one cell");
    auto* predict = app.add_subcommand("predict", "Print the prediction set at one covariate as JSON");
    for (auto* sub : {table, figure, predict}) {
        sub->add_option("--config", config, "JSON run configuration")->required();
        sub->add_flag("--naive", inv.naive, "Use the brute-force reference pipeline");
    }
    table->add_option("--out", out, "Output CSV path");
    figure->add_option("--out", out, "Output CSV path");
    predict->add_option("--x", x, "Test covariate")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ExitCode::Config);
    }

    inv.config = config;
    if (!out.empty()) inv.out = out;
    if (table->parsed()) {
        inv.mode = Mode::Table;
    } else if (figure->parsed()) {
        inv.mode = Mode::Figure;
    } else {
        inv.mode = Mode::Predict;
        inv.x = x;
    }
    return static_cast<int>(lcpms::cli::run(inv, std::cout, std::cerr));
}
