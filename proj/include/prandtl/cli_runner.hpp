#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "prandtl/grid_field.hpp"
#include "prandtl/nash_moser_driver.hpp"
#include "prandtl/run_log.hpp"

namespace prandtl {

inline constexpr const char* kVersion = "1.0.0";

/// Valid experiment tags, in CLI order.
const std::vector<std::string>& experiment_tags();
bool is_experiment_tag(const std::string& tag);

struct ShearSettings {
    double sigma = 1.0;
    double beta = 1.0;
    int compatibility_order = 3;  // number of d_y^{2j} w1_0(0) residuals reported
};

struct NormSettings {
    double ell = 1.0;
    int k_max = 2;
};

struct MollifySettings {
    std::vector<double> thetas{4.0, 6.0, 8.0, 12.0, 16.0};
    int family_size = 4;
    double divergence_theta = 4.0;
};

struct LinearizedSettings {
    int forcings = 10;
    int levels = 3;
};

struct StabilitySettings {
    double epsilon = 0.004;  // first datum; the second is epsilon + gap
    double gap = 0.002;
};

struct DirichletSettings {
    std::vector<double> betas{10.0, 100.0, 1000.0, 10000.0};
};

struct RunConfig {
    std::string experiment;  // empty until set by the file or the command line
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    GridSpec grid{2001, 64, 401, 0.5, 2.0, 20.0};  // shear grid; n_x, x_len also feed the norms audit
    ShearSettings shear;
    NormSettings norms;
    IterationConfig iteration;
    MollifySettings mollify;
    LinearizedSettings linearized;
    StabilitySettings stability;
    DirichletSettings dirichlet;

    std::vector<std::string> defaulted;  // dotted keys that took their default

    nlohmann::json to_json() const;
    /// Throws ConfigError or StructuralError naming the offending key.
    void validate() const;
};

/// Parses and validates a JSON config. Parse errors report line and column;
/// unknown keys are rejected.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

struct CheckResult {
    std::string id;         // e.g. "c08.residual_reduction"
    int criterion = 0;      // acceptance criterion number, 0 for none
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string relation;   // how value compares to threshold: "<=", ">=", "in"
    std::string detail;
    nlohmann::json to_json() const;
};

/// In-memory result of one experiment. Files are written by run_experiment.
struct ExperimentOutput {
    std::vector<CheckResult> checks;
    std::map<std::string, nlohmann::json> json_files;
    std::map<std::string, std::string> text_files;  // CSV tables and two-column plot data
    std::vector<std::pair<std::string, double>> phases;  // wall-clock seconds
};

ExperimentOutput run_shear(const RunConfig& cfg, RunLog& log);
ExperimentOutput run_mollify(const RunConfig& cfg, RunLog& log);
ExperimentOutput run_linearized_mms(const RunConfig& cfg, RunLog& log);
ExperimentOutput run_nash_moser(const RunConfig& cfg, RunLog& log);
ExperimentOutput run_stability(const RunConfig& cfg, RunLog& log);
ExperimentOutput run_dirichlet_limit(const RunConfig& cfg, RunLog& log);
ExperimentOutput run_norms_audit(const RunConfig& cfg, RunLog& log);

/// Dispatches on cfg.experiment without touching the disk.
ExperimentOutput dispatch_experiment(const RunConfig& cfg, RunLog& log);

struct RunManifest {
    std::string experiment;
    std::string status;  // "pass", "fail" or "error"
    int exit_code = 0;
    std::string error;
    nlohmann::json config;
    std::vector<std::string> defaulted;
    std::vector<std::pair<std::string, double>> phases;
    std::vector<CheckResult> checks;
    std::vector<std::string> files;
    std::vector<std::string> warnings;
    nlohmann::json to_json() const;
};

/// Runs the experiment and writes every output plus manifest.json into
/// cfg.output_dir. The manifest is written even when the experiment throws.
RunManifest run_experiment(const RunConfig& cfg);

/// 0 pass, 1 check failure, 2 configuration error, 3 numerical failure.
enum ExitCode : int { exit_pass = 0, exit_check_failed = 1, exit_config_error = 2, exit_numerical_failure = 3 };

/// Two-column plot data, one "x y" pair per line after a '#' header.
std::string plot_series(const std::string& x_name, const std::string& y_name, const std::vector<double>& xs,
                        const std::vector<double>& ys);

}  // namespace prandtl
