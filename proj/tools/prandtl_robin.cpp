#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "prandtl/cli_runner.hpp"
#include "prandtl/errors.hpp"
#include "prandtl/parallel.hpp"

int main(int argc, char** argv) {
    using namespace prandtl;
    std::string tags;
    for (const std::string& t : experiment_tags()) tags += (tags.empty() ? "" : ", ") + t;

    CLI::App app{"Robin boundary layer experiments"};
    app.set_version_flag("--version", std::string(kVersion));
    std::string experiment, config_path, out_dir;
    long long seed = -1;
    app.add_option("experiment", experiment, "one of: " + tags)->required();
    app.add_option("--config", config_path, "JSON configuration file")->required();
    app.add_option("--out", out_dir, "output directory (overrides output_dir)");
    app.add_option("--seed", seed, "random seed (overrides seed)")->check(CLI::NonNegativeNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_pass : exit_config_error;
    }
    if (!is_experiment_tag(experiment)) {
        std::cerr << "unknown experiment '" << experiment << "'\nvalid experiments: " << tags << "\n" << app.help();
        return exit_config_error;
    }

    RunConfig cfg;
    try {
        cfg = load_config(config_path);
        cfg.experiment = experiment;
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config_error;
    }
    if (!cfg.defaulted.empty()) {
        std::cerr << "defaults used:";
        for (const std::string& k : cfg.defaulted) std::cerr << " " << k;
        std::cerr << "\n";
    }
    std::cerr << "threads: " << thread_count() << "\n";

    const RunManifest m = run_experiment(cfg);
    for (const std::string& w : m.warnings) std::cerr << "warning: " << w << "\n";
    for (const CheckResult& c : m.checks)
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.id << " value=" << c.value << " " << c.relation << " "
                  << c.threshold << (c.detail.empty() ? "" : " (" + c.detail + ")") << "\n";
    if (!m.error.empty()) std::cerr << "error: " << m.error << "\n";
    std::cout << experiment << ": " << m.status << ", outputs in " << cfg.output_dir << "\n";
    return m.exit_code;
}
