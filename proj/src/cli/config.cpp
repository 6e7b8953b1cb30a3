#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "lcpms/cli.hpp"

namespace lcpms::cli {

using nlohmann::json;

std::string_view to_string(Mode mode) noexcept {
    switch (mode) {
        case Mode::Table: return "table";
        case Mode::Figure: return "figure";
        case Mode::Predict: return "predict";
    }
    return "unknown";
}

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

namespace {

std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const json& obj, const std::string& prefix, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) throw ConfigError(join(prefix, key), "unknown key");
    }
}

const json& require_object(const json& j, const std::string& field) {
    if (!j.is_object()) throw ConfigError(field, "expected an object");
    return j;
}

double get_number(const json& j, const std::string& field) {
    if (!j.is_number()) throw ConfigError(field, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
    return v;
}

double get_positive(const json& j, const std::string& field) {
    const double v = get_number(j, field);
    if (!(v > 0.0)) throw ConfigError(field, "must be positive");
    return v;
}

std::uint64_t get_unsigned(const json& j, const std::string& field) {
    if (!j.is_number_integer()) throw ConfigError(field, "expected a nonnegative integer");
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    const auto v = j.get<std::int64_t>();
    if (v < 0) throw ConfigError(field, "expected a nonnegative integer");
    return static_cast<std::uint64_t>(v);
}

std::size_t get_count(const json& j, const std::string& field) {
    const std::uint64_t v = get_unsigned(j, field);
    if (v == 0) throw ConfigError(field, "must be positive");
    return static_cast<std::size_t>(v);
}

std::string get_string(const json& j, const std::string& field) {
    if (!j.is_string()) throw ConfigError(field, "expected a string");
    return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& field) {
    if (!j.is_boolean()) throw ConfigError(field, "expected true or false");
    return j.get<bool>();
}

template <class T, class Get>
std::vector<T> get_list(const json& j, const std::string& field, Get get) {
    // A bare scalar is accepted as a one-element list.
    if (!j.is_array()) return {get(j, field)};
    if (j.empty()) throw ConfigError(field, "must not be empty");
    std::vector<T> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get(j[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

BankSpec parse_custom_bank(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) throw ConfigError(field, "expected a nonempty list of models");
    BankSpec spec;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string f = field + "[" + std::to_string(i) + "]";
        const json& m = require_object(j[i], f);
        if (!m.contains("family")) throw ConfigError(join(f, "family"), "missing");
        const std::string family = get_string(m["family"], join(f, "family"));
        ModelDescriptor d;
        if (family == "nadaraya_watson") {
            reject_unknown(m, f, {"family", "bandwidth"});
            if (!m.contains("bandwidth")) throw ConfigError(join(f, "bandwidth"), "missing");
            d.family = ModelFamily::NadarayaWatson;
            d.bandwidth = get_positive(m["bandwidth"], join(f, "bandwidth"));
        } else if (family == "sinusoid") {
            reject_unknown(m, f, {"family", "lambda", "window"});
            if (!m.contains("lambda")) throw ConfigError(join(f, "lambda"), "missing");
            if (!m.contains("window")) throw ConfigError(join(f, "window"), "missing");
            d.family = ModelFamily::Sinusoid;
            d.lambda = get_positive(m["lambda"], join(f, "lambda"));
            d.bandwidth = get_positive(m["window"], join(f, "window"));
        } else {
            throw ConfigError(join(f, "family"), "expected nadaraya_watson or sinusoid, got '" + family + "'");
        }
        spec.push_back(d);
    }
    return spec;
}

// Experiment matrices of the two published tables, used when the config
// does not give one.
void default_matrix(RunConfig& c) {
    if (c.bank_name == "parametric10") {
        if (c.ns.empty()) c.ns = {200, 500, 1000};
        if (c.sigmas.empty()) c.sigmas = {0.1, 0.3};
        if (c.localizer_bws.empty()) c.localizer_bws = {0.1, 0.3};
    } else {
        if (c.ns.empty()) c.ns = {200, 500, 1000, 2000};
        if (c.sigmas.empty()) c.sigmas = {0.1, 0.3};
        if (c.localizer_bws.empty()) c.localizer_bws = {0.3};
    }
}

}  // namespace

RunConfig parse_config(std::string_view text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("malformed JSON: ") + e.what());
    }
    require_object(root, "config");
    reject_unknown(root, "", {"mode", "bank", "models", "dgp", "alpha", "grid", "kernel", "matrix", "n_reps",
                              "n_test", "n_train", "master_seed", "output", "naive", "baseline", "threads",
                              "replication"});

    RunConfig c;
    if (root.contains("mode")) {
        const std::string mode = get_string(root["mode"], "mode");
        c.mode_given = true;
        if (mode == "table") c.mode = Mode::Table;
        else if (mode == "figure") c.mode = Mode::Figure;
        else if (mode == "predict") c.mode = Mode::Predict;
        else throw ConfigError("mode", "expected table, figure or predict, got '" + mode + "'");
    }

    if (root.contains("bank")) c.bank_name = get_string(root["bank"], "bank");
    if (c.bank_name == "parametric10") {
        c.bank = parametric_bank_spec();
        c.dgp = DgpFamily::PiecewiseSine;
    } else if (c.bank_name == "nw5") {
        c.bank = nonparametric_bank_spec();
        c.dgp = DgpFamily::SineCubed;
    } else if (c.bank_name != "custom") {
        throw ConfigError("bank", "expected parametric10, nw5 or custom, got '" + c.bank_name + "'");
    }
    if (c.bank_name == "custom") {
        if (!root.contains("models")) throw ConfigError("models", "required when bank is custom");
        c.bank = parse_custom_bank(root["models"], "models");
    } else if (root.contains("models")) {
        throw ConfigError("models", "only allowed when bank is custom");
    }

    if (root.contains("dgp")) {
        const std::string name = get_string(root["dgp"], "dgp");
        try {
            c.dgp = dgp_family_from_string(name);
        } catch (const std::invalid_argument&) {
            throw ConfigError("dgp", "expected piecewise_sine or sine_cubed, got '" + name + "'");
        }
    }

    if (root.contains("alpha")) {
        c.alpha = get_number(root["alpha"], "alpha");
        if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("alpha", "must lie in (0, 1)");
    }

    if (root.contains("grid")) {
        const json& g = require_object(root["grid"], "grid");
        reject_unknown(g, "grid", {"min", "max", "step"});
        if (g.contains("min")) c.grid.min = get_number(g["min"], "grid.min");
        if (g.contains("max")) c.grid.max = get_number(g["max"], "grid.max");
        if (g.contains("step")) c.grid.step = get_positive(g["step"], "grid.step");
        if (!(c.grid.min > 0.0 && c.grid.min < 1.0)) throw ConfigError("grid.min", "must lie in (0, 1)");
        if (!(c.grid.max > 0.0 && c.grid.max < 1.0)) throw ConfigError("grid.max", "must lie in (0, 1)");
        if (c.grid.max < c.grid.min) throw ConfigError("grid.max", "must not be below grid.min");
    }

    if (root.contains("kernel")) {
        const std::string name = get_string(root["kernel"], "kernel");
        try {
            c.kernel = kernel_family_from_string(name);
        } catch (const std::invalid_argument&) {
            throw ConfigError("kernel", "expected gaussian or exponential, got '" + name + "'");
        }
    }

    if (root.contains("matrix")) {
        const json& m = require_object(root["matrix"], "matrix");
        reject_unknown(m, "matrix", {"n", "sigma", "localizer_bw"});
        if (m.contains("n")) c.ns = get_list<std::size_t>(m["n"], "matrix.n", get_count);
        if (m.contains("sigma")) c.sigmas = get_list<double>(m["sigma"], "matrix.sigma", get_positive);
        if (m.contains("localizer_bw")) {
            c.localizer_bws = get_list<double>(m["localizer_bw"], "matrix.localizer_bw", get_positive);
        }
    }
    default_matrix(c);

    if (root.contains("n_reps")) c.n_reps = get_count(root["n_reps"], "n_reps");
    if (root.contains("n_test")) c.n_test = get_count(root["n_test"], "n_test");
    if (root.contains("n_train")) c.n_train = get_count(root["n_train"], "n_train");
    if (root.contains("master_seed")) c.master_seed = get_unsigned(root["master_seed"], "master_seed");
    if (root.contains("output")) {
        c.output = get_string(root["output"], "output");
        if (c.output->empty()) throw ConfigError("output", "must not be empty");
    }
    if (root.contains("naive")) c.naive = get_bool(root["naive"], "naive");
    if (root.contains("baseline")) {
        const std::string b = get_string(root["baseline"], "baseline");
        if (b == "calibrated") c.uncalibrated_baseline = false;
        else if (b == "uncalibrated") c.uncalibrated_baseline = true;
        else throw ConfigError("baseline", "expected calibrated or uncalibrated, got '" + b + "'");
    }
    if (root.contains("threads")) c.threads = static_cast<int>(get_unsigned(root["threads"], "threads"));
    if (root.contains("replication")) {
        c.replication = static_cast<std::size_t>(get_unsigned(root["replication"], "replication"));
    }

    try {
        (void)c.gamma_grid();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("grid", e.what());
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("error while reading config file '" + path.string() + "'");
    return parse_config(buf.str());
}

GammaGrid RunConfig::gamma_grid() const { return GammaGrid::uniform(grid.min, grid.max, grid.step); }

TableSpec RunConfig::table_spec() const {
    TableSpec spec;
    spec.base.family = dgp;
    spec.base.bank = bank;
    spec.base.n_train = n_train;
    spec.base.n_test = n_test;
    spec.base.kernel = KernelSpec(kernel, localizer_bws.empty() ? 1.0 : localizer_bws.front());
    spec.base.alpha = alpha;
    spec.base.grid = gamma_grid();
    spec.base.n_reps = n_reps;
    spec.base.engine = naive ? Engine::Naive : Engine::Optimized;
    spec.ns = ns;
    spec.sigmas = sigmas;
    spec.localizer_bws = localizer_bws;
    spec.master_seed = master_seed;
    spec.uncalibrated_baseline = uncalibrated_baseline;
    return spec;
}

ExperimentConfig RunConfig::first_cell() const {
    return cell_config(table_spec(), ns.front(), sigmas.front(), localizer_bws.front());
}

}  // namespace lcpms::cli
