#include "malurl/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <vector>

#include "malurl/common.hpp"

namespace malurl {

std::string_view to_string(ClassificationMode mode) {
    return mode == ClassificationMode::binary ? "binary" : "multiclass";
}

std::string_view to_string(FeatureMode mode) { return mode == FeatureMode::concat ? "concat" : "bmu"; }

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Bound {
    double lo;
    bool lo_closed;
    double hi;
    bool hi_closed;

    bool contains(double v) const {
        return (lo_closed ? v >= lo : v > lo) && (hi_closed ? v <= hi : v < hi);
    }
    std::string text() const {
        const auto num = [](double v) { return std::isinf(v) ? std::string("inf") : format_exact(v); };
        return std::string(lo_closed ? "[" : "(") + num(lo) + ", " + num(hi) + (hi_closed ? "]" : ")");
    }
};

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const std::string& why) {
    fail(ErrorKind::config, std::string(key) + " = " + std::string(value) + ": " + why);
}

double real_in(std::string_view key, std::string_view value, Bound bound) {
    double v = 0.0;
    try {
        v = parse_double(value);
    } catch (const Error&) {
        bad_value(key, value, "expected a number");
    }
    if (!std::isfinite(v) || !bound.contains(v)) bad_value(key, value, "outside bound " + bound.text());
    return v;
}

std::size_t count_at_least(std::string_view key, std::string_view value, long long min) {
    long long v = 0;
    try {
        v = parse_integer(value);
    } catch (const Error&) {
        bad_value(key, value, "expected an integer");
    }
    if (v < min) bad_value(key, value, "outside bound [" + std::to_string(min) + ", inf)");
    return static_cast<std::size_t>(v);
}

bool boolean(std::string_view key, std::string_view value) {
    if (value == "true") return true;
    if (value == "false") return false;
    bad_value(key, value, "expected true or false");
}

void only(std::string_view key, std::string_view value, std::string_view accepted) {
    if (value != accepted) bad_value(key, value, "only '" + std::string(accepted) + "' is supported");
}

std::string text(double v) { return format_exact(v); }
std::string text(std::size_t v) { return std::to_string(v); }

struct Key {
    std::string_view name;
    std::string_view help;
    std::function<std::string(const PipelineConfig&)> get;
    std::function<void(PipelineConfig&, std::string_view key, std::string_view value)> set;
};

const std::vector<Key>& keys() {
    static const std::vector<Key> table = {
        {"seed", "master seed; stages use seed+1..seed+4",
         [](const PipelineConfig& c) { return std::to_string(c.seed); },
         [](PipelineConfig& c, auto k, auto v) { c.seed = count_at_least(k, v, 0); }},
        {"data.url_column", "CSV column holding the URL",
         [](const PipelineConfig& c) { return c.columns.url; },
         [](PipelineConfig& c, auto, auto v) { c.columns.url = std::string(v); }},
        {"data.class_column", "CSV column holding the class name",
         [](const PipelineConfig& c) { return c.columns.label; },
         [](PipelineConfig& c, auto, auto v) { c.columns.label = std::string(v); }},
        {"split.train", "training fraction",
         [](const PipelineConfig& c) { return text(c.split.train); },
         [](PipelineConfig& c, auto k, auto v) { c.split.train = real_in(k, v, {0, false, 1, false}); }},
        {"split.validation", "validation fraction",
         [](const PipelineConfig& c) { return text(c.split.validation); },
         [](PipelineConfig& c, auto k, auto v) { c.split.validation = real_in(k, v, {0, false, 1, false}); }},
        {"split.test", "test fraction",
         [](const PipelineConfig& c) { return text(c.split.test); },
         [](PipelineConfig& c, auto k, auto v) { c.split.test = real_in(k, v, {0, false, 1, false}); }},
        {"classification.mode", "binary (benign vs malicious) or multiclass (4 classes)",
         [](const PipelineConfig& c) { return std::string(to_string(c.mode)); },
         [](PipelineConfig& c, auto k, auto v) {
             if (v == "binary") c.mode = ClassificationMode::binary;
             else if (v == "multiclass") c.mode = ClassificationMode::multiclass;
             else bad_value(k, v, "expected binary or multiclass");
         }},
        {"features.mode", "concat (lexical + map position) or bmu (map position only)",
         [](const PipelineConfig& c) { return std::string(to_string(c.feature_mode)); },
         [](PipelineConfig& c, auto k, auto v) {
             if (v == "concat") c.feature_mode = FeatureMode::concat;
             else if (v == "bmu") c.feature_mode = FeatureMode::bmu;
             else bad_value(k, v, "expected concat or bmu");
         }},
        {"som.grid", "map size as ROWSxCOLS",
         [](const PipelineConfig& c) { return std::to_string(c.som.rows) + "x" + std::to_string(c.som.cols); },
         [](PipelineConfig& c, auto k, std::string_view v) {
             const auto x = v.find('x');
             if (x == std::string_view::npos) bad_value(k, v, "expected ROWSxCOLS");
             const auto rows = count_at_least(k, v.substr(0, x), 1);
             const auto cols = count_at_least(k, v.substr(x + 1), 1);
             if (rows * cols < 2) bad_value(k, v, "grid needs at least 2 nodes");
             c.som.rows = rows;
             c.som.cols = cols;
         }},
        {"som.learning_rate", "initial SOM learning rate",
         [](const PipelineConfig& c) { return text(c.som.initial_alpha); },
         [](PipelineConfig& c, auto k, auto v) { c.som.initial_alpha = real_in(k, v, {0, false, 1, true}); }},
        {"som.iterations", "SOM epoch budget",
         [](const PipelineConfig& c) { return text(c.som.iterations); },
         [](PipelineConfig& c, auto k, auto v) { c.som.iterations = count_at_least(k, v, 1); }},
        {"som.radius", "initial neighbourhood radius",
         [](const PipelineConfig& c) { return text(c.som.initial_radius); },
         [](PipelineConfig& c, auto k, auto v) { c.som.initial_radius = real_in(k, v, {0, false, kInf, false}); }},
        {"som.initialization", "weight initialization",
         [](const PipelineConfig&) { return std::string("random"); },
         [](PipelineConfig&, auto k, auto v) { only(k, v, "random"); }},
        {"som.neighborhood", "neighbourhood function",
         [](const PipelineConfig&) { return std::string("gaussian"); },
         [](PipelineConfig&, auto k, auto v) { only(k, v, "gaussian"); }},
        {"rmo.inertia", "particle inertia weight",
         [](const PipelineConfig& c) { return text(c.rmo.inertia); },
         [](PipelineConfig& c, auto k, auto v) { c.rmo.inertia = real_in(k, v, {0, true, kInf, false}); }},
        {"rmo.cognitive", "pull toward the particle's best position",
         [](const PipelineConfig& c) { return text(c.rmo.cognitive); },
         [](PipelineConfig& c, auto k, auto v) { c.rmo.cognitive = real_in(k, v, {0, true, kInf, false}); }},
        {"rmo.social", "pull toward the best node",
         [](const PipelineConfig& c) { return text(c.rmo.social); },
         [](PipelineConfig& c, auto k, auto v) { c.rmo.social = real_in(k, v, {0, true, kInf, false}); }},
        {"rmo.velocity_clamp", "per-component velocity limit",
         [](const PipelineConfig& c) { return text(c.rmo.velocity_clamp); },
         [](PipelineConfig& c, auto k, auto v) { c.rmo.velocity_clamp = real_in(k, v, {0, false, kInf, false}); }},
        {"rbfn.centers", "number of RBF centers (capped at the distinct training points)",
         [](const PipelineConfig& c) { return text(c.rbf_centers); },
         [](PipelineConfig& c, auto k, auto v) { c.rbf_centers = count_at_least(k, v, 1); }},
        {"rbfn.center_init", "center initialization",
         [](const PipelineConfig&) { return std::string("kmeans"); },
         [](PipelineConfig&, auto k, auto v) { only(k, v, "kmeans"); }},
        {"rbfn.learning_rate", "gradient descent step size",
         [](const PipelineConfig& c) { return text(c.gd.learning_rate); },
         [](PipelineConfig& c, auto k, auto v) { c.gd.learning_rate = real_in(k, v, {0, false, kInf, false}); }},
        {"rbfn.momentum", "gradient descent momentum",
         [](const PipelineConfig& c) { return text(c.gd.momentum); },
         [](PipelineConfig& c, auto k, auto v) { c.gd.momentum = real_in(k, v, {0, true, 1, false}); }},
        {"rbfn.epochs", "gradient descent epochs",
         [](const PipelineConfig& c) { return text(c.gd.epochs); },
         [](PipelineConfig& c, auto k, auto v) { c.gd.epochs = count_at_least(k, v, 1); }},
        {"rbfn.batch_size", "mini-batch size",
         [](const PipelineConfig& c) { return text(c.gd.batch_size); },
         [](PipelineConfig& c, auto k, auto v) { c.gd.batch_size = count_at_least(k, v, 1); }},
        {"tabu.list_size", "tabu list capacity",
         [](const PipelineConfig& c) { return text(c.tabu.list_size); },
         [](PipelineConfig& c, auto k, auto v) { c.tabu.list_size = count_at_least(k, v, 1); }},
        {"tabu.iterations", "search iterations",
         [](const PipelineConfig& c) { return text(c.tabu.iterations); },
         [](PipelineConfig& c, auto k, auto v) { c.tabu.iterations = count_at_least(k, v, 1); }},
        {"tabu.aspiration", "allow tabu moves that beat the best known",
         [](const PipelineConfig& c) { return std::string(c.tabu.aspiration_enabled ? "true" : "false"); },
         [](PipelineConfig& c, auto k, auto v) { c.tabu.aspiration_enabled = boolean(k, v); }},
        {"tabu.stop_after_non_improving", "stop after this many iterations without improvement",
         [](const PipelineConfig& c) { return text(c.tabu.stop_after_non_improving); },
         [](PipelineConfig& c, auto k, auto v) { c.tabu.stop_after_non_improving = count_at_least(k, v, 1); }},
        {"tabu.neighbors", "candidates per iteration",
         [](const PipelineConfig& c) { return text(c.tabu.neighbors_per_iteration); },
         [](PipelineConfig& c, auto k, auto v) { c.tabu.neighbors_per_iteration = count_at_least(k, v, 1); }},
        {"tabu.mutation_rate", "per-parameter perturbation probability",
         [](const PipelineConfig& c) { return text(c.tabu.mutation_rate); },
         [](PipelineConfig& c, auto k, auto v) { c.tabu.mutation_rate = real_in(k, v, {0, false, 1, true}); }},
        {"tabu.crossover_rate", "probability of copying a block from the best known",
         [](const PipelineConfig& c) { return text(c.tabu.crossover_rate); },
         [](PipelineConfig& c, auto k, auto v) { c.tabu.crossover_rate = real_in(k, v, {0, true, 1, true}); }},
        {"tabu.initial_temperature", "initial perturbation scale x 1000",
         [](const PipelineConfig& c) { return text(c.tabu.initial_temperature); },
         [](PipelineConfig& c, auto k, auto v) { c.tabu.initial_temperature = real_in(k, v, {0, false, kInf, false}); }},
        {"tabu.cooling", "perturbation scale schedule",
         [](const PipelineConfig&) { return std::string("exponential"); },
         [](PipelineConfig&, auto k, auto v) { only(k, v, "exponential"); }},
        {"tabu.cooling_factor", "per-iteration scale multiplier",
         [](const PipelineConfig& c) { return text(c.tabu.cooling_factor); },
         [](PipelineConfig& c, auto k, auto v) { c.tabu.cooling_factor = real_in(k, v, {0, false, 1, false}); }},
    };
    return table;
}

}  // namespace

void PipelineConfig::validate() const {
    som.validate();
    rmo.validate();
    gd.validate();
    tabu.validate();
    if (rbf_centers < 1) fail(ErrorKind::config, "rbfn.centers must be >= 1");
    if (std::abs(split.train + split.validation + split.test - 1.0) > 1e-9)
        fail(ErrorKind::config, "split.train + split.validation + split.test must equal 1");
    if (columns.url.empty() || columns.label.empty() || columns.url == columns.label)
        fail(ErrorKind::config, "data.url_column and data.class_column must be distinct and non-empty");
}

PipelineConfig parse_config(std::string_view text) {
    PipelineConfig config;
    std::set<std::string, std::less<>> seen;
    std::size_t line_number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_number;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto where = "line " + std::to_string(line_number) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) fail(ErrorKind::config, where + "expected 'key = value'");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) fail(ErrorKind::config, where + "expected 'key = value'");

        const auto& table = keys();
        const auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) { return k.name == key; });
        if (it == table.end()) fail(ErrorKind::config, where + "unknown key '" + std::string(key) + "'");
        if (!seen.emplace(key).second) fail(ErrorKind::config, where + "duplicate key '" + std::string(key) + "'");
        try {
            it->set(config, key, value);
        } catch (const Error& e) {
            fail(ErrorKind::config, where + e.what());
        }
    }
    config.validate();
    return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    if (path.empty()) return PipelineConfig{};
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::config, "cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const Error& e) {
        fail(ErrorKind::config, path.string() + ": " + e.what());
    }
}

std::string config_text(const PipelineConfig& config) {
    std::string out;
    for (const auto& k : keys()) out += std::string(k.name) + " = " + k.get(config) + "\n";
    return out;
}

std::string config_reference() {
    const PipelineConfig defaults;
    std::string out;
    for (const auto& k : keys()) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "  %-30s default %-12s %s\n", std::string(k.name).c_str(),
                      k.get(defaults).c_str(), std::string(k.help).c_str());
        out += buf;
    }
    return out;
}

}  // namespace malurl
