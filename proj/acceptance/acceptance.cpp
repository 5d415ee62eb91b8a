// Acceptance run: one line per criterion, exit 1 if any listed criterion fails.
// Usage: prandtl_acceptance [criterion ...]   (default: 1..12)

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "prandtl/cli_runner.hpp"

namespace {

struct Criterion {
    int id;
    const char* experiment;
    const char* title;
};

const Criterion kCriteria[] = {
    {1, "shear", "finite differences match the kernel shear"},
    {2, "shear", "shear margins and concavity persist"},
    {3, "shear", "alpha system maximum principle"},
    {4, "mollify", "smoothing and approximation exponents"},
    {5, "mollify", "smoothers preserve the wall trace and divergence"},
    {6, "linearized-mms", "vorticity solver convergence order"},
    {7, "linearized-mms", "vorticity stability constant under refinement"},
    {8, "nash-moser", "iteration convergence and audits"},
    {9, "nash-moser", "increment rate"},
    {10, "nash-moser", "schedule sums"},
    {11, "stability", "Lipschitz dependence on the data"},
    {12, "dirichlet-limit", "wall trace as beta grows"},
};

std::string config_file(const std::string& tag) {
    std::string f = tag;
    for (char& c : f)
        if (c == '-') c = '_';
    return std::string(PRANDTL_CONFIG_DIR) + "/" + f + ".json";
}

}  // namespace

int main(int argc, char** argv) {
    using namespace prandtl;
    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) {
        const int c = std::atoi(argv[i]);
        if (c < 1 || c > 12) {
            std::cerr << "criterion must be 1..12, got " << argv[i] << "\n";
            return 2;
        }
        wanted.push_back(c);
    }
    if (wanted.empty())
        for (int c = 1; c <= 12; ++c) wanted.push_back(c);

    std::map<std::string, RunManifest> runs;
    bool all = true;
    for (int id : wanted) {
        const Criterion& cr = kCriteria[id - 1];
        auto it = runs.find(cr.experiment);
        if (it == runs.end()) {
            RunManifest m;
            try {
                RunConfig cfg = load_config(config_file(cr.experiment));
                cfg.experiment = cr.experiment;
                cfg.output_dir = std::string(PRANDTL_ACCEPTANCE_OUT) + "/" + cr.experiment;
                m = run_experiment(cfg);
            } catch (const std::exception& e) {
                m.status = "error";
                m.error = e.what();
            }
            it = runs.emplace(cr.experiment, std::move(m)).first;
        }
        const RunManifest& m = it->second;
        bool pass = m.error.empty();
        int seen = 0;
        std::ostringstream detail;
        for (const CheckResult& c : m.checks) {
            if (c.criterion != id) continue;
            ++seen;
            pass = pass && c.pass;
            const std::string name = c.id.substr(c.id.find('.') + 1);
            detail << " " << name << "=" << c.value << (c.pass ? "" : "[" + c.relation + " " + std::to_string(c.threshold) + "]");
        }
        if (seen == 0) pass = false;
        if (!m.error.empty()) detail << " error: " << m.error;
        char head[32];
        std::snprintf(head, sizeof head, "criterion %02d %s", id, pass ? "PASS" : "FAIL");
        std::cout << head << "  " << cr.title << " |" << detail.str() << std::endl;
        all = all && pass;
    }
    return all ? 0 : 1;
}
