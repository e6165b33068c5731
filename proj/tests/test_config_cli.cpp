#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "maxreglab/experiments.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace maxreglab;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("empty config yields the documented defaults") {
    const ExperimentConfig cfg = parse_config_text("");
    CHECK(cfg.n == 128);
    CHECK(cfg.m == 256);
    CHECK(cfg.horizon == 1.0);
    CHECK(cfg.p == 2.0);
    CHECK(cfg.seed == 42);
    CHECK(cfg.experiment == "all");
}

TEST_CASE("key parsing") {
    CHECK(parse_config_text("p = 2.5").p == 2.5);
    CHECK(parse_config_text("experiment = kappa").experiment == "kappa");
    CHECK(parse_config_text("seed = 18446744073709551615").seed == 18446744073709551615ULL);
    const ExperimentConfig g = parse_config_text("grids = 16, 32,64");
    CHECK(g.sweep_grids == std::vector<int>{16, 32, 64});
    CHECK(parse_config_text("tol.kappa_growth_slope_hi = 0.4").tol("kappa_growth_slope_hi", 0.3) ==
          0.4);
    CHECK(parse_config_text("# comment only\n\n").n == 128);
}

TEST_CASE("config errors carry line numbers") {
    CHECK_THROWS_WITH_AS(parse_config_text("n = -4"), doctest::Contains("line 1"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("n = 64\nwhat = 3"), doctest::Contains("line 2"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("experiment = warp"), doctest::Contains("unknown"),
                         ConfigError);
    CHECK_THROWS_AS(parse_config_text("n 64"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("p ="), ConfigError);
}

TEST_CASE("runner writes deterministic CSV bodies") {
    ExperimentConfig cfg = parse_config_text("experiment = dirichlet\nn = 64");
    const auto base = std::filesystem::temp_directory_path() / "mrl_det_test";
    std::filesystem::remove_all(base);
    cfg.out_dir = (base / "a").string();
    const RunStatus s1 = run_experiment(cfg);
    cfg.out_dir = (base / "b").string();
    const RunStatus s2 = run_experiment(cfg);
    CHECK(s1.exit_code == 0);
    CHECK(s2.exit_code == 0);
    const std::string csv1 = slurp(base / "a" / "dirichlet.csv");
    const std::string csv2 = slurp(base / "b" / "dirichlet.csv");
    CHECK(!csv1.empty());
    CHECK(csv1 == csv2);
    CHECK(std::filesystem::exists(base / "a" / "dirichlet.meta"));
    std::filesystem::remove_all(base);
}

TEST_CASE("failing tolerance produces exit code 3") {
    ExperimentConfig cfg =
        parse_config_text("experiment = spectra\nn = 64\ntol.free_eigenvalue = 1e-300");
    const auto dir = std::filesystem::temp_directory_path() / "mrl_fail_test";
    std::filesystem::remove_all(dir);
    cfg.out_dir = dir.string();
    const RunStatus s = run_experiment(cfg);
    CHECK(s.exit_code == 3);
    const std::string csv = slurp(dir / "spectra.csv");
    CHECK(csv.find("FAIL") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("summary rows carry criterion identifiers and render 17 digits") {
    ExperimentConfig cfg = parse_config_text("experiment = dirichlet\nn = 64");
    const auto outs = run_suites(cfg);
    REQUIRE(outs.size() == 1);
    const std::string csv = render_csv(outs[0]);
    CHECK(csv.rfind("check,criterion,measured,lower,upper,status\n", 0) == 0);
    CHECK(csv.find("AC2") != std::string::npos);
    std::ostringstream probe;
    probe << render_csv(outs[0]);
    // a 17-significant-digit float has at least 16 digits after the leading one
    CHECK(csv.find('.') != std::string::npos);
}

TEST_CASE("unknown experiment name is rejected by the dispatcher") {
    ExperimentConfig cfg;
    cfg.experiment = "definitely-not-registered";
    CHECK_THROWS_AS(run_suites(cfg), ConfigError);
}
