#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "prandtl/cli_runner.hpp"
#include "prandtl/errors.hpp"

using namespace prandtl;

namespace {

std::string config_error(const std::string& text) {
    try {
        (void)parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("an empty object yields the defaults and lists them") {
    const RunConfig c = parse_config("{}");
    CHECK(c.grid.n_t == 2001);
    CHECK(c.grid.n_y == 401);
    CHECK(c.iteration.theta0 == 10.0);
    CHECK(c.iteration.shift == ShiftSign::past);
    auto has = [&](const std::string& k) { return std::find(c.defaulted.begin(), c.defaulted.end(), k) != c.defaulted.end(); };
    CHECK(has("grid.n_t"));
    CHECK(has("iteration.grid.n_y"));
    CHECK(has("dirichlet.betas"));
}

TEST_CASE("values override defaults") {
    const RunConfig c = parse_config(R"({"seed": 9, "shear": {"beta": 3.5}, "iteration": {"shift": "future"}})");
    CHECK(c.seed == 9);
    CHECK(c.shear.beta == 3.5);
    CHECK(c.iteration.shift == ShiftSign::future);
    CHECK(std::find(c.defaulted.begin(), c.defaulted.end(), "shear.beta") == c.defaulted.end());
}

TEST_CASE("malformed configs are rejected with a useful message") {
    CHECK(config_error(R"({"grid": {"n_q": 3}})").find("grid.n_q") != std::string::npos);
    CHECK(config_error(R"({"seed": "x"})").find("seed") != std::string::npos);
    CHECK(config_error(R"({"iteration": {"theta0": 2}})").find("theta0") != std::string::npos);
    CHECK(config_error(R"({"iteration": {"shift": "sideways"}})").find("shift") != std::string::npos);
    CHECK(config_error(R"({"experiment": "warp"})").find("warp") != std::string::npos);
    CHECK(config_error(R"({"shear": {"beta": -1}})").find("beta") != std::string::npos);
    CHECK(config_error("[1, 2]").find("object") != std::string::npos);
    const std::string parse = config_error("{\n  \"seed\": ,\n}");
    CHECK(parse.find("line 2") != std::string::npos);
}

TEST_CASE("too few y nodes for the Taylor construction is structural") {
    CHECK_THROWS_AS(parse_config(R"({"iteration": {"k0": 6, "grid": {"n_y": 12}}})"), StructuralError);
}

TEST_CASE("config round trips through JSON") {
    const RunConfig c = parse_config(R"({"seed": 4, "mollify": {"thetas": [4, 8, 16]}})");
    const RunConfig d = parse_config(c.to_json().dump());
    CHECK(c.to_json() == d.to_json());
    CHECK(d.defaulted.empty());
}

TEST_CASE("experiment tags") {
    CHECK(experiment_tags().size() == 7);
    for (const std::string& t : experiment_tags()) CHECK(is_experiment_tag(t));
    CHECK_FALSE(is_experiment_tag("shear2"));
}

TEST_CASE("plot series layout") {
    CHECK(plot_series("x", "y", {1.0, 2.0}, {3.0, 4.0}) == "# x y\n1 3\n2 4\n");
}

TEST_CASE("norms audit writes its outputs and a manifest") {
    namespace fs = std::filesystem;
    RunConfig c = parse_config(R"({"grid": {"n_x": 32, "n_y": 161, "y_max": 8.0}})");
    c.experiment = "norms-audit";
    c.output_dir = std::string(PRANDTL_TEST_TMP) + "/norms";
    fs::remove_all(c.output_dir);
    const RunManifest m = run_experiment(c);
    CHECK(m.status == "pass");
    CHECK(m.exit_code == exit_pass);
    CHECK(fs::exists(fs::path(c.output_dir) / "manifest.json"));
    CHECK(fs::exists(fs::path(c.output_dir) / "norms_audit.json"));
    CHECK(fs::exists(fs::path(c.output_dir) / "index_sets.csv"));
    std::ifstream in(fs::path(c.output_dir) / "manifest.json");
    const nlohmann::json j = nlohmann::json::parse(in);
    CHECK(j["status"] == "pass");
    CHECK(j["config"]["experiment"] == "norms-audit");
    CHECK(j.contains("wall_clock_seconds"));
}

TEST_CASE("a failing experiment still leaves a manifest") {
    namespace fs = std::filesystem;
    RunConfig c = parse_config("{}");
    c.experiment = "warp-drive";  // bypasses validate, so dispatch throws
    c.output_dir = std::string(PRANDTL_TEST_TMP) + "/broken";
    fs::remove_all(c.output_dir);
    const RunManifest m = run_experiment(c);
    CHECK(m.status == "error");
    CHECK(m.exit_code == exit_config_error);
    CHECK(m.error.find("warp-drive") != std::string::npos);
    CHECK(fs::exists(fs::path(c.output_dir) / "manifest.json"));
}
