#include "maxreglab/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace maxreglab {

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {
        "identities", "spectra", "dirichlet", "sector",  "admissibility", "kappa",
        "rbound",     "maxreg",  "perturbed", "nonauto", "example-pde",   "all"};
    return names;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& what) {
    throw ConfigError("config error at line " + std::to_string(line) + ": " + what);
}

double parse_positive_real(const std::string& v, int line, const std::string& key) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        fail(line, "cannot parse numeric value for '" + key + "'");
    }
    if (used != v.size()) fail(line, "trailing characters after numeric value for '" + key + "'");
    if (!(x > 0.0)) fail(line, "'" + key + "' must be positive");
    return x;
}

int parse_positive_int(const std::string& v, int line, const std::string& key) {
    const double x = parse_positive_real(v, line, key);
    const int i = static_cast<int>(x);
    if (static_cast<double>(i) != x) fail(line, "'" + key + "' must be an integer");
    return i;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string stripped = trim(raw.substr(0, raw.find('#')));
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) fail(line, "expected 'key = value'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) fail(line, "empty key");
        if (value.empty()) fail(line, "empty value for '" + key + "'");

        if (key == "experiment") {
            const auto& names = experiment_names();
            if (std::find(names.begin(), names.end(), value) == names.end())
                fail(line, "unknown experiment '" + value + "'");
            cfg.experiment = value;
        } else if (key == "n") {
            cfg.n = parse_positive_int(value, line, key);
        } else if (key == "m") {
            cfg.m = parse_positive_int(value, line, key);
        } else if (key == "T") {
            cfg.horizon = parse_positive_real(value, line, key);
        } else if (key == "p") {
            cfg.p = parse_positive_real(value, line, key);
        } else if (key == "seed") {
            unsigned long long s = 0;
            const auto res = std::from_chars(value.data(), value.data() + value.size(), s);
            if (res.ec != std::errc() || res.ptr != value.data() + value.size())
                fail(line, "seed must be an unsigned 64-bit integer");
            cfg.seed = s;
        } else if (key == "trials") {
            cfg.trials = parse_positive_int(value, line, key);
        } else if (key == "subset_k") {
            cfg.subset_k = parse_positive_int(value, line, key);
        } else if (key == "grids") {
            cfg.sweep_grids.clear();
            std::istringstream gs(value);
            std::string tok;
            while (std::getline(gs, tok, ',')) {
                cfg.sweep_grids.push_back(parse_positive_int(trim(tok), line, key));
            }
            if (cfg.sweep_grids.empty()) fail(line, "grids list is empty");
        } else if (key == "out_dir") {
            cfg.out_dir = value;
        } else if (key == "r_min") {
            cfg.r_min = parse_positive_real(value, line, key);
        } else if (key == "r_max") {
            cfg.r_max = parse_positive_real(value, line, key);
        } else if (key == "n_radii") {
            cfg.n_radii = parse_positive_int(value, line, key);
        } else if (key == "n_angles") {
            cfg.n_angles = parse_positive_int(value, line, key);
        } else if (key == "lambda_min") {
            cfg.lambda_min = parse_positive_real(value, line, key);
        } else if (key == "lambda_max") {
            cfg.lambda_max = parse_positive_real(value, line, key);
        } else if (key == "lambda_count") {
            cfg.lambda_count = parse_positive_int(value, line, key);
        } else if (key == "alpha") {
            cfg.alpha = parse_positive_real(value, line, key);
        } else if (key.rfind("tol.", 0) == 0) {
            cfg.tolerance_overrides[key.substr(4)] = parse_positive_real(value, line, key);
        } else {
            fail(line, "unknown key '" + key + "'");
        }
    }
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace maxreglab
