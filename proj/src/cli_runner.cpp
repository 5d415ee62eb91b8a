#include "prandtl/cli_runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "prandtl/errors.hpp"
#include "prandtl/fit.hpp"
#include "prandtl/linearized_prandtl.hpp"
#include "prandtl/shear_flow.hpp"
#include "prandtl/smoothing_ops.hpp"
#include "prandtl/weighted_norms.hpp"

namespace prandtl {

using nlohmann::json;

const std::vector<std::string>& experiment_tags() {
    static const std::vector<std::string> tags{"shear",           "mollify",   "linearized-mms", "nash-moser",
                                               "stability",       "dirichlet-limit", "norms-audit"};
    return tags;
}

bool is_experiment_tag(const std::string& tag) {
    const auto& t = experiment_tags();
    return std::find(t.begin(), t.end(), tag) != t.end();
}

namespace {

// ---------------------------------------------------------------- config reading

std::string join_tags() {
    std::string s;
    for (const std::string& t : experiment_tags()) s += (s.empty() ? "" : ", ") + t;
    return s;
}

// Reads one JSON object, remembers which keys were consumed and which took defaults.
class Section {
public:
    Section(const json* obj, std::string path, std::vector<std::string>& defaulted)
        : obj_(obj), path_(std::move(path)), defaulted_(defaulted) {
        if (obj_ && !obj_->is_object()) throw ConfigError(name("") + " must be an object");
    }

    std::string name(const std::string& key) const {
        if (path_.empty()) return key;
        return key.empty() ? path_ : path_ + "." + key;
    }

    const json* find(const std::string& key) {
        used_.insert(key);
        if (!obj_) return nullptr;
        auto it = obj_->find(key);
        return it == obj_->end() ? nullptr : &*it;
    }

    double number(const std::string& key, double def) {
        const json* v = find(key);
        if (!v) {
            defaulted_.push_back(name(key));
            return def;
        }
        if (!v->is_number()) throw ConfigError(name(key) + " must be a number");
        const double d = v->get<double>();
        if (!std::isfinite(d)) throw ConfigError(name(key) + " must be finite");
        return d;
    }

    long long integer(const std::string& key, long long def) {
        const json* v = find(key);
        if (!v) {
            defaulted_.push_back(name(key));
            return def;
        }
        if (!v->is_number_integer()) throw ConfigError(name(key) + " must be an integer");
        return v->get<long long>();
    }

    std::size_t count(const std::string& key, std::size_t def) {
        const long long v = integer(key, static_cast<long long>(def));
        if (v < 0) throw ConfigError(name(key) + " must be non-negative");
        return static_cast<std::size_t>(v);
    }

    std::string text(const std::string& key, const std::string& def) {
        const json* v = find(key);
        if (!v) {
            defaulted_.push_back(name(key));
            return def;
        }
        if (!v->is_string()) throw ConfigError(name(key) + " must be a string");
        return v->get<std::string>();
    }

    std::vector<double> numbers(const std::string& key, const std::vector<double>& def) {
        const json* v = find(key);
        if (!v) {
            defaulted_.push_back(name(key));
            return def;
        }
        if (!v->is_array()) throw ConfigError(name(key) + " must be an array of numbers");
        std::vector<double> out;
        for (const json& e : *v) {
            if (!e.is_number()) throw ConfigError(name(key) + " must be an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    Section sub(const std::string& key) {
        const json* v = find(key);
        if (v && !v->is_object()) throw ConfigError(name(key) + " must be an object");
        return Section(v, name(key), defaulted_);
    }

    // Rejects keys that no reader asked for.
    void finish() const {
        if (!obj_) return;
        for (auto it = obj_->begin(); it != obj_->end(); ++it)
            if (!used_.count(it.key())) throw ConfigError("unknown key " + name(it.key()));
    }

private:
    const json* obj_;
    std::string path_;
    std::vector<std::string>& defaulted_;
    std::set<std::string> used_;
};

GridSpec read_grid(Section s, const GridSpec& def) {
    GridSpec g;
    g.n_t = s.count("n_t", def.n_t);
    g.n_x = s.count("n_x", def.n_x);
    g.n_y = s.count("n_y", def.n_y);
    g.t_max = s.number("t_max", def.t_max);
    g.x_len = s.number("x_len", def.x_len);
    g.y_max = s.number("y_max", def.y_max);
    s.finish();
    return g;
}

json grid_json(const GridSpec& g) {
    return {{"n_t", g.n_t}, {"n_x", g.n_x}, {"n_y", g.n_y}, {"t_max", g.t_max}, {"x_len", g.x_len}, {"y_max", g.y_max}};
}

void validate_grid(const GridSpec& g, const std::string& key) {
    try {
        g.validate();
    } catch (const StructuralError& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

// Line and column of a byte offset (1-based).
std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

// ---------------------------------------------------------------- output helpers

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string fmt_short(double v) {
    std::ostringstream os;
    os << std::setprecision(4) << v;
    return os.str();
}

CheckResult check_le(std::string id, int criterion, double value, double threshold, std::string detail = {}) {
    return {std::move(id), criterion, value <= threshold, value, threshold, "<=", std::move(detail)};
}

CheckResult check_ge(std::string id, int criterion, double value, double threshold, std::string detail = {}) {
    return {std::move(id), criterion, value >= threshold, value, threshold, ">=", std::move(detail)};
}

CheckResult check_in(std::string id, int criterion, double value, double center, double tol, std::string detail = {}) {
    if (!detail.empty()) detail += "; ";
    detail += "target " + fmt_short(center) + " +- " + fmt_short(tol);
    return {std::move(id), criterion, std::abs(value - center) <= tol, value, tol, "in", std::move(detail)};
}

std::vector<double> profile_at(const Field& prof, std::size_t it) {
    std::vector<double> out(prof.ny());
    for (std::size_t iy = 0; iy < prof.ny(); ++iy) out[iy] = prof(it, 0, iy);
    return out;
}

GridSpec with_counts(GridSpec g, std::size_t nt, std::size_t nx, std::size_t ny) {
    g.n_t = nt;
    g.n_x = nx;
    g.n_y = ny;
    return g;
}

// Largest K in {20, 10, 5, 4, 2, 1} dividing n - 1.
std::size_t slice_count(std::size_t n_t) {
    for (std::size_t k : {20u, 10u, 5u, 4u, 2u, 1u})
        if ((n_t - 1) % k == 0) return k;
    return 1;
}

// ---------------------------------------------------------------- shear

struct ShearComparison {
    double linf = 0.0;
    double fd_robin = 0.0;
    double seconds = 0.0;
    ShearProfile kernel;
};

ShearComparison compare_shear(const GridSpec& g, double sigma, double beta) {
    const auto t0 = Clock::now();
    const std::size_t k = slice_count(g.n_t);
    const GridSpec gk = with_counts(g, k + 1, 4, g.n_y);
    ShearComparison out;
    out.kernel = kernel_shear(canonical_w1_deficit(sigma, beta), beta, gk);
    const Profile d0 = profile_at(out.kernel.deficit, 0);
    const ShearProfile fd = solve_heat_robin_fd_deficit(d0, beta, with_counts(g, g.n_t, 4, g.n_y));
    const std::size_t stride = (g.n_t - 1) / k;
    for (std::size_t it = 0; it <= k; ++it)
        for (std::size_t iy = 0; iy < g.n_y; ++iy)
            out.linf = std::max(out.linf, std::abs(out.kernel.u_s(it, 0, iy) - fd.u_s(it * stride, 0, iy)));
    out.fd_robin = check_monotonicity(fd).robin_residual;
    out.seconds = seconds_since(t0);
    return out;
}

}  // namespace

// ---------------------------------------------------------------- RunConfig

json RunConfig::to_json() const {
    const IterationConfig& it = iteration;
    return {{"experiment", experiment},
            {"output_dir", output_dir},
            {"seed", seed},
            {"grid", grid_json(grid)},
            {"shear", {{"sigma", shear.sigma}, {"beta", shear.beta}, {"compatibility_order", shear.compatibility_order}}},
            {"norms", {{"ell", norms.ell}, {"k_max", norms.k_max}}},
            {"iteration",
             {{"theta0", it.theta0},
              {"k_tilde", it.k_tilde},
              {"k0", it.k0},
              {"epsilon", it.epsilon},
              {"delta", it.delta},
              {"max_iters", it.max_iters},
              {"residual_tol", it.residual_tol},
              {"norm_k", it.norm_k},
              {"norm_ell", it.norm_ell},
              {"shift", to_string(it.shift)},
              {"max_backoffs", it.max_backoffs},
              {"correction_sweeps", it.correction_sweeps},
              {"grid", grid_json(it.grid)}}},
            {"mollify",
             {{"thetas", mollify.thetas},
              {"family_size", mollify.family_size},
              {"divergence_theta", mollify.divergence_theta}}},
            {"linearized", {{"forcings", linearized.forcings}, {"levels", linearized.levels}}},
            {"stability", {{"epsilon", stability.epsilon}, {"gap", stability.gap}}},
            {"dirichlet", {{"betas", dirichlet.betas}}}};
}

void RunConfig::validate() const {
    if (!experiment.empty() && !is_experiment_tag(experiment))
        throw ConfigError("experiment '" + experiment + "' is not one of: " + join_tags());
    validate_grid(grid, "grid");
    validate_grid(iteration.grid, "iteration.grid");
    if (!(shear.sigma > 0.0)) throw ConfigError("shear.sigma must be positive");
    if (!(shear.beta > 0.0)) throw ConfigError("shear.beta must be positive");
    if (shear.compatibility_order < 1) throw ConfigError("shear.compatibility_order must be at least 1");
    if (norms.ell < 0.0) throw ConfigError("norms.ell must be non-negative");
    if (norms.k_max < 0 || norms.k_max > 2) throw ConfigError("norms.k_max must lie in [0, 2]");
    // 2 k0 y-derivatives need 2 k0 + 4 nodes on every grid the Taylor construction may see.
    for (const auto& [key, g] : {std::pair<std::string, GridSpec>{"grid.n_y", grid}, {"iteration.grid.n_y", iteration.grid}}) {
        if (iteration.k0 >= 0 && g.n_y < static_cast<std::size_t>(2 * iteration.k0 + 4)) {
            std::ostringstream os;
            os << key << " = " << g.n_y << " cannot resolve 2*k0 = " << 2 * iteration.k0 << " y-derivatives (needs >= "
               << 2 * iteration.k0 + 4 << ")";
            throw StructuralError(os.str());
        }
    }
    try {
        iteration.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(e.what()));
    }
    if (mollify.thetas.size() < 3) throw ConfigError("mollify.thetas needs at least 3 values");
    for (double t : mollify.thetas)
        if (!(t > 0.0)) throw ConfigError("mollify.thetas must be positive");
    if (mollify.family_size < 1) throw ConfigError("mollify.family_size must be at least 1");
    if (!(mollify.divergence_theta > 0.0)) throw ConfigError("mollify.divergence_theta must be positive");
    if (linearized.forcings < 1) throw ConfigError("linearized.forcings must be at least 1");
    if (linearized.levels < 2 || linearized.levels > 4) throw ConfigError("linearized.levels must lie in [2, 4]");
    if (!(stability.epsilon > 0.0)) throw ConfigError("stability.epsilon must be positive");
    if (!(stability.gap > 0.0)) throw ConfigError("stability.gap must be positive");
    if (dirichlet.betas.size() < 2) throw ConfigError("dirichlet.betas needs at least 2 values");
    for (double b : dirichlet.betas)
        if (!(b > 0.0)) throw ConfigError("dirichlet.betas must be positive");
}

RunConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_col(text, e.byte);
        std::ostringstream os;
        os << "config parse error at line " << line << ", column " << col << ": " << e.what();
        throw ConfigError(os.str());
    }
    if (!root.is_object()) throw ConfigError("config root must be a JSON object");

    RunConfig cfg;
    std::vector<std::string>& d = cfg.defaulted;
    Section top(&root, "", d);
    cfg.experiment = top.text("experiment", "");
    cfg.output_dir = top.text("output_dir", cfg.output_dir);
    {
        const long long seed = top.integer("seed", 0);
        if (seed < 0) throw ConfigError("seed must be non-negative");
        cfg.seed = static_cast<std::uint64_t>(seed);
    }
    cfg.grid = read_grid(top.sub("grid"), cfg.grid);
    {
        Section s = top.sub("shear");
        cfg.shear.sigma = s.number("sigma", cfg.shear.sigma);
        cfg.shear.beta = s.number("beta", cfg.shear.beta);
        cfg.shear.compatibility_order = static_cast<int>(s.integer("compatibility_order", cfg.shear.compatibility_order));
        s.finish();
    }
    {
        Section s = top.sub("norms");
        cfg.norms.ell = s.number("ell", cfg.norms.ell);
        cfg.norms.k_max = static_cast<int>(s.integer("k_max", cfg.norms.k_max));
        s.finish();
    }
    {
        Section s = top.sub("iteration");
        IterationConfig& it = cfg.iteration;
        it.theta0 = s.number("theta0", it.theta0);
        it.k_tilde = static_cast<int>(s.integer("k_tilde", it.k_tilde));
        it.k0 = static_cast<int>(s.integer("k0", it.k0));
        it.epsilon = s.number("epsilon", it.epsilon);
        it.delta = s.number("delta", it.delta);
        it.max_iters = static_cast<int>(s.integer("max_iters", it.max_iters));
        it.residual_tol = s.number("residual_tol", it.residual_tol);
        it.norm_k = static_cast<int>(s.integer("norm_k", it.norm_k));
        it.norm_ell = s.number("norm_ell", it.norm_ell);
        const std::string shift = s.text("shift", to_string(it.shift));
        if (shift == "past")
            it.shift = ShiftSign::past;
        else if (shift == "future")
            it.shift = ShiftSign::future;
        else
            throw ConfigError("iteration.shift must be \"past\" or \"future\"");
        it.max_backoffs = static_cast<int>(s.integer("max_backoffs", it.max_backoffs));
        it.correction_sweeps = static_cast<int>(s.integer("correction_sweeps", it.correction_sweeps));
        it.grid = read_grid(s.sub("grid"), it.grid);
        s.finish();
    }
    {
        Section s = top.sub("mollify");
        cfg.mollify.thetas = s.numbers("thetas", cfg.mollify.thetas);
        cfg.mollify.family_size = static_cast<int>(s.integer("family_size", cfg.mollify.family_size));
        cfg.mollify.divergence_theta = s.number("divergence_theta", cfg.mollify.divergence_theta);
        s.finish();
    }
    {
        Section s = top.sub("linearized");
        cfg.linearized.forcings = static_cast<int>(s.integer("forcings", cfg.linearized.forcings));
        cfg.linearized.levels = static_cast<int>(s.integer("levels", cfg.linearized.levels));
        s.finish();
    }
    {
        Section s = top.sub("stability");
        cfg.stability.epsilon = s.number("epsilon", cfg.stability.epsilon);
        cfg.stability.gap = s.number("gap", cfg.stability.gap);
        s.finish();
    }
    {
        Section s = top.sub("dirichlet");
        cfg.dirichlet.betas = s.numbers("betas", cfg.dirichlet.betas);
        s.finish();
    }
    top.finish();
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

json CheckResult::to_json() const {
    return {{"id", id}, {"criterion", criterion}, {"pass", pass},          {"value", value},
            {"threshold", threshold}, {"relation", relation}, {"detail", detail}};
}

std::string plot_series(const std::string& x_name, const std::string& y_name, const std::vector<double>& xs,
                        const std::vector<double>& ys) {
    std::ostringstream os;
    os << "# " << x_name << " " << y_name << "\n";
    for (std::size_t i = 0; i < std::min(xs.size(), ys.size()); ++i) os << fmt(xs[i]) << " " << fmt(ys[i]) << "\n";
    return os.str();
}

// ---------------------------------------------------------------- experiments

ExperimentOutput run_shear(const RunConfig& cfg, RunLog& log) {
    ExperimentOutput out;
    const GridSpec& g = cfg.grid;
    const double sigma = cfg.shear.sigma, beta = cfg.shear.beta;

    auto t0 = Clock::now();
    const ShearComparison fine = compare_shear(g, sigma, beta);
    out.phases.emplace_back("cross_validation_fine", seconds_since(t0));
    t0 = Clock::now();
    const GridSpec coarse = with_counts(g, (g.n_t - 1) / 2 + 1, g.n_x, (g.n_y - 1) / 2 + 1);
    const ShearComparison half = compare_shear(coarse, sigma, beta);
    out.phases.emplace_back("cross_validation_coarse", seconds_since(t0));
    const double ratio = fine.linf > 0.0 ? half.linf / fine.linf : 0.0;
    out.checks.push_back(check_le("c01.fd_vs_kernel_linf", 1, fine.linf, 1e-3));
    out.checks.push_back(check_ge("c01.richardson_ratio", 1, ratio, 3.0,
                                  "coarse " + fmt_short(half.linf) + ", fine " + fmt_short(fine.linf)));
    out.checks.push_back(check_le("c01.runtime_seconds", 1, fine.seconds, 30.0));
    out.checks.push_back(check_le("shear.fd_robin_residual", 0, fine.fd_robin, 1e-4));

    // monotonicity margins and concavity persistence over beta
    t0 = Clock::now();
    const std::size_t k = slice_count(g.n_t);
    const GridSpec gk = with_counts(g, k + 1, 4, g.n_y);
    json margins = json::object();
    double worst_margin = std::numeric_limits<double>::infinity();
    double worst_concavity = -std::numeric_limits<double>::infinity();
    bool concave_data = true;
    for (double b : {0.5, 1.0, 5.0}) {
        const ShearProfile p = b == beta ? fine.kernel : kernel_shear(canonical_w1_deficit(sigma, b), b, gk);
        const MarginReport m = check_monotonicity(p);
        double max_uyy0 = -std::numeric_limits<double>::infinity();
        for (std::size_t iy = 0; iy < g.n_y; ++iy) max_uyy0 = std::max(max_uyy0, p.uyy(0, 0, iy));
        std::vector<double> compat = compatibility_residuals(canonical_initial_w1(sigma, b, g), g, cfg.shear.compatibility_order);
        margins[fmt_short(b)] = {{"min_u", m.min_u},
                                 {"min_uy", m.min_uy},
                                 {"min_beta_minus_alpha", m.min_beta_minus_alpha},
                                 {"max_uyy", m.max_uyy},
                                 {"max_uyy_initial", max_uyy0},
                                 {"robin_residual", m.robin_residual},
                                 {"delta_s", p.delta_s},
                                 {"compatibility_residuals", compat}};
        worst_margin = std::min({worst_margin, m.min_u, m.min_uy, m.min_beta_minus_alpha});
        if (max_uyy0 > 1e-12) concave_data = false;
        worst_concavity = std::max(worst_concavity, m.max_uyy);
    }
    out.phases.emplace_back("margins", seconds_since(t0));
    out.checks.push_back({"c02.margins_positive", 2, worst_margin > 0.0, worst_margin, 0.0, ">",
                          "min over u, u_y, beta - alpha for beta in {0.5, 1, 5}"});
    out.checks.push_back({"c02.concavity_persistence", 2, concave_data && worst_concavity <= 1e-8, worst_concavity, 1e-8,
                          "<=", concave_data ? "initial data concave" : "initial data not concave"});

    // alpha-system maximum principle on three widths
    t0 = Clock::now();
    json alpha_json = json::object();
    double worst_excess = -std::numeric_limits<double>::infinity();
    double worst_gap = std::numeric_limits<double>::infinity();
    std::vector<double> ts, amax;
    for (double s : {0.5 * sigma, sigma, 2.0 * sigma}) {
        const ShearProfile p0 = kernel_shear(canonical_w1_deficit(s, beta), beta, with_counts(g, 4, 4, g.n_y));
        const Profile a0 = profile_at(p0.alpha, 0);
        const Field alpha = solve_alpha_system(a0, beta, with_counts(g, g.n_t, 4, g.n_y));
        const double max0 = *std::max_element(a0.begin(), a0.end());
        double delta_s0 = std::numeric_limits<double>::infinity();
        for (double a : a0) delta_s0 = std::min(delta_s0, beta - a);
        const double bound = std::max(max0, 0.0);
        const double floor = std::min(beta, delta_s0);  // min{delta_beta, delta_s0} with delta_beta = beta
        double max_alpha = -std::numeric_limits<double>::infinity(), min_gap = std::numeric_limits<double>::infinity();
        for (std::size_t it = 0; it < alpha.nt(); ++it) {
            double row = -std::numeric_limits<double>::infinity();
            for (std::size_t iy = 0; iy < alpha.ny(); ++iy) {
                row = std::max(row, alpha(it, 0, iy));
                min_gap = std::min(min_gap, beta - alpha(it, 0, iy));
            }
            max_alpha = std::max(max_alpha, row);
            if (s == sigma && (it % std::max<std::size_t>(1, (alpha.nt() - 1) / 100) == 0)) {
                ts.push_back(g.t(it));
                amax.push_back(row);
            }
        }
        worst_excess = std::max(worst_excess, max_alpha - bound);
        worst_gap = std::min(worst_gap, min_gap - floor);
        alpha_json[fmt_short(s)] = {{"max_alpha0", max0},     {"max_alpha", max_alpha}, {"bound", bound},
                                    {"delta_s0", delta_s0},   {"min_beta_minus_alpha", min_gap},
                                    {"margin_floor", floor}};
    }
    out.phases.emplace_back("alpha_system", seconds_since(t0));
    out.checks.push_back(check_le("c03.alpha_max_principle", 3, worst_excess, 1e-6,
                                  "max alpha - max{max alpha0, 0} over sigma/2, sigma, 2 sigma"));
    out.checks.push_back(check_ge("c03.alpha_margin", 3, worst_gap, -1e-6, "beta - alpha - min{beta, delta_s0}"));

    // outputs
    std::ostringstream csv;
    csv << "t,y,u_s,w1,alpha\n";
    for (std::size_t it = 0; it < fine.kernel.u_s.nt(); ++it)
        for (std::size_t iy = 0; iy < g.n_y; ++iy)
            csv << fmt(gk.t(it)) << "," << fmt(g.y(iy)) << "," << fmt(fine.kernel.u_s(it, 0, iy)) << ","
                << fmt(fine.kernel.w1(it, 0, iy)) << "," << fmt(fine.kernel.alpha(it, 0, iy)) << "\n";
    out.text_files["shear_profile.csv"] = csv.str();
    out.json_files["monotonicity_margins.json"] = {
        {"margins", margins},
        {"alpha_system", alpha_json},
        {"cross_validation",
         {{"linf_fine", fine.linf}, {"linf_coarse", half.linf}, {"richardson_ratio", ratio}, {"fd_robin", fine.fd_robin}}}};
    out.text_files["shear_error_vs_dy.dat"] =
        plot_series("dy", "linf_fd_minus_kernel", {coarse.dy(), g.dy()}, {half.linf, fine.linf});
    out.text_files["alpha_max_vs_t.dat"] = plot_series("t", "max_alpha", ts, amax);
    (void)log;
    return out;
}

namespace {

// Smooth ramp from 0 at t <= t0 to 1 at t >= t1.
double ramp(double t, double t0, double t1) {
    if (t <= t0) return 0.0;
    if (t >= t1) return 1.0;
    const double a = std::exp(-1.0 / (t - t0)), b = std::exp(-1.0 / (t1 - t));
    return a / (a + b);
}

// Fields with vanishing history chi(t) g(t, x, y), chi a smooth ramp over [0, T/2]:
// `count` random smooth members, two slowly varying members (near-extremal for the
// bounded probes) and an x-frequency ladder at 0.5, 1 and 2 times each theta, where the
// extremal ratios of the gain and approximation probes live.
std::vector<Field> smoothing_family(const GridSpec& g, int count, const std::vector<double>& thetas,
                                    std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<Field> fam;
    const double two_pi = 2.0 * std::numbers::pi;
    for (int i = 0; i < count; ++i) {
        const double a1 = U(rng), a2 = U(rng), a3 = U(rng), ph = U(rng) * std::numbers::pi;
        const double kx = 1.0 + (i % 3), wt = 2.0 + 2.0 * std::abs(U(rng)), decay = 1.0 + 0.5 * std::abs(U(rng));
        fam.push_back(Field::sample(g, [=](double t, double x, double y) {
            const double xs = std::cos(two_pi * kx * x / g.x_len + ph);
            return ramp(t, 0.0, 0.5 * g.t_max) * (a1 + a2 * std::sin(wt * t) + a3 * y) * xs * std::exp(-decay * y);
        }));
    }
    for (double decay : {0.1, 0.25})
        fam.push_back(Field::sample(g, [=](double t, double, double y) {
            return ramp(t, 0.0, 0.5 * g.t_max) * std::exp(-decay * y);
        }));
    std::set<int> modes;
    const int nyquist = static_cast<int>(g.n_x / 4);  // keep k dx <= pi / 2
    for (double th : thetas)
        for (double c : {0.5, 1.0, 2.0}) {
            const int m = static_cast<int>(std::lround(c * th * g.x_len / two_pi));
            if (m >= 1 && m <= nyquist) modes.insert(m);
        }
    for (int m : modes) {
        const double ph = U(rng) * std::numbers::pi;
        fam.push_back(Field::sample(g, [=](double t, double x, double y) {
            return ramp(t, 0.0, 0.5 * g.t_max) * std::cos(two_pi * m * x / g.x_len + ph) * std::exp(-y);
        }));
    }
    return fam;
}

json exponent_json(const ExponentFit& f) {
    return {{"thetas", f.thetas}, {"ratios", f.ratios}, {"exponent", f.fit.slope}, {"fit_residual", f.fit.residual}};
}

}  // namespace

ExperimentOutput run_mollify(const RunConfig& cfg, RunLog& log) {
    ExperimentOutput out;
    std::mt19937_64 rng(cfg.seed);
    const double max_theta = *std::max_element(cfg.mollify.thetas.begin(), cfg.mollify.thetas.end());
    // desk grid with 2.25 nodes per 1/theta at the largest theta. The past shift
    // window 2/theta must stay short against T, so T is at least 8/theta_min.
    const double hmax = 1.0 / (2.25 * max_theta);
    const double min_theta = *std::min_element(cfg.mollify.thetas.begin(), cfg.mollify.thetas.end());
    const double tmax = std::max(cfg.grid.t_max, 8.0 / min_theta), xl = cfg.grid.x_len, ymax = 4.0;
    GridSpec gm{static_cast<std::size_t>(std::ceil(tmax / hmax)) + 1, static_cast<std::size_t>(std::ceil(xl / hmax)),
                static_cast<std::size_t>(std::ceil(ymax / hmax)) + 1, tmax, xl, ymax};
    const double ell = cfg.norms.ell;

    auto t0 = Clock::now();
    const std::vector<Field> fam = smoothing_family(gm, cfg.mollify.family_size, cfg.mollify.thetas, rng);
    struct Probe {
        const char* name;
        ExponentProbe probe;
        int s, alpha;
        double target;
    };
    const Probe probes[] = {{"gain0_s0", ExponentProbe::smoothing, 0, 0, 0.0},
                            {"gain0_s1", ExponentProbe::smoothing, 1, 1, 0.0},
                            {"gain1_s1_a0", ExponentProbe::smoothing, 1, 0, 1.0},
                            {"approx_s0_a1", ExponentProbe::approximation, 0, 1, -1.0}};
    json ex = json::object();
    for (const Probe& p : probes) {
        const ExponentFit f = measure_operator_exponents(fam, p.probe, p.s, p.alpha, cfg.mollify.thetas, ell);
        ex[p.name] = exponent_json(f);
        ex[p.name]["target"] = p.target;
        out.checks.push_back(check_in(std::string("c04.") + p.name, 4, f.exponent(), p.target, 0.15,
                                      "s = " + std::to_string(p.s) + ", alpha = " + std::to_string(p.alpha)));
        out.text_files[std::string("exponent_") + p.name + ".dat"] = plot_series("theta", "worst_ratio", f.thetas, f.ratios);
    }
    out.phases.emplace_back("exponents", seconds_since(t0));

    // structure preservation
    t0 = Clock::now();
    const double th = cfg.mollify.divergence_theta;
    const double kx = 2.0 * std::numbers::pi / xl;
    auto pair_on = [&](const GridSpec& g) {
        Field u = Field::sample(g, [&](double, double x, double y) { return std::cos(kx * x) * std::exp(-y); });
        Field v = Field::sample(g, [&](double, double x, double y) { return kx * std::sin(kx * x) * (1.0 - std::exp(-y)); });
        return std::pair<Field, Field>(std::move(u), std::move(v));
    };
    const GridSpec gc{17, 32, 65, cfg.grid.t_max, xl, ymax}, gf{33, 64, 129, cfg.grid.t_max, xl, ymax};
    const auto [uc, vc] = pair_on(gc);
    const auto [uf, vf] = pair_on(gf);
    const double rc = verify_divergence_preservation(uc, vc, th);
    const double rf = verify_divergence_preservation(uf, vf, th);
    const double bound = 5.0 * (gf.dx() * gf.dx() + gf.dy() * gf.dy());
    const Field v_lin = Field::sample(gf, [&](double t, double x, double y) { return (1.0 + t) * std::sin(kx * x) * y; });
    const Field sv = smooth_Sv(v_lin, th);
    const double wall = sv.trace(0).max_abs();
    out.phases.emplace_back("structure", seconds_since(t0));
    out.checks.push_back(check_le("c05.sv_wall_trace", 5, wall, 1e-12));
    out.checks.push_back(check_le("c05.divergence_residual", 5, rf, bound, "5 (dx^2 + dy^2) on the fine grid"));
    out.checks.push_back(check_ge("c05.divergence_richardson", 5, rf > 0.0 ? rc / rf : 0.0, 3.0,
                                  "coarse " + fmt_short(rc) + ", fine " + fmt_short(rf)));

    out.json_files["exponents.json"] = {{"grid", grid_json(gm)}, {"probes", ex}};
    out.json_files["structure.json"] = {{"theta", th},
                                        {"divergence_coarse", rc},
                                        {"divergence_fine", rf},
                                        {"divergence_bound", bound},
                                        {"sv_wall_trace", wall}};
    out.text_files["divergence_vs_dx.dat"] = plot_series("dx", "divergence_residual", {gc.dx(), gf.dx()}, {rc, rf});
    (void)log;
    return out;
}

ExperimentOutput run_linearized_mms(const RunConfig& cfg, RunLog& log) {
    ExperimentOutput out;
    const double T = cfg.grid.t_max, L = cfg.grid.x_len;

    // manufactured solution: space refinement at fixed fine dt, time by self-convergence
    auto t0 = Clock::now();
    json mms = json::object();
    double space_order = std::numeric_limits<double>::infinity(), time_order = std::numeric_limits<double>::infinity();
    std::ostringstream csv;
    csv << "wall_offset,kind,n_t,n_x,n_y,error\n";
    std::vector<double> hs, es;
    for (double a : {0.0, 0.7}) {
        std::vector<double> errs;
        for (int l = 0; l < 3; ++l) {
            const GridSpec g{321, static_cast<std::size_t>(16 << l), static_cast<std::size_t>((50 << l) + 1), T, L, 12.0};
            const ManufacturedCase mc = manufactured_case(g, a);
            const VorticitySolution s = solve_vorticity(mc.bg, mc.f_tilde, nullptr, {4, cfg.norms.ell, &log});
            errs.push_back((s.w - mc.w_exact).max_abs());
            csv << a << ",space," << g.n_t << "," << g.n_x << "," << g.n_y << "," << fmt(errs.back()) << "\n";
            if (a == 0.7) {
                hs.push_back(g.dy());
                es.push_back(errs.back());
            }
        }
        const double so = std::log2(errs[1] / errs[2]);
        space_order = std::min(space_order, so);

        std::vector<Field> finals;
        std::vector<double> diffs;
        for (std::size_t nt : {11u, 21u, 41u, 81u}) {
            const GridSpec g{nt, 32, 201, T, L, 12.0};
            const ManufacturedCase mc = manufactured_case(g, a);
            const VorticitySolution s = solve_vorticity(mc.bg, mc.f_tilde, nullptr, {4, cfg.norms.ell, &log});
            Field last(GridSpec{1, 32, 201, T, L, 12.0});
            for (std::size_t ix = 0; ix < 32; ++ix)
                for (std::size_t iy = 0; iy < 201; ++iy) last(0, ix, iy) = s.w(nt - 1, ix, iy);
            csv << a << ",time," << nt << ",32,201," << fmt((s.w - mc.w_exact).max_abs()) << "\n";
            finals.push_back(std::move(last));
        }
        for (std::size_t i = 0; i + 1 < finals.size(); ++i) diffs.push_back((finals[i] - finals[i + 1]).max_abs());
        const double to = std::log2(diffs[diffs.size() - 2] / diffs.back());
        time_order = std::min(time_order, to);
        mms[fmt_short(a)] = {{"space_errors", errs}, {"space_order", so}, {"time_differences", diffs}, {"time_order", to}};
    }
    out.phases.emplace_back("mms", seconds_since(t0));
    out.checks.push_back(check_ge("c06.space_order", 6, space_order, 1.8, "min over wall offsets 0 and 0.7"));
    out.checks.push_back(check_ge("c06.time_order", 6, time_order, 1.8, "self-convergence at t = T"));

    // stability constant under refinement on the canonical shear background
    t0 = Clock::now();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    struct Forcing {
        double a[3], ph[3], b, c;
    };
    std::vector<Forcing> forcings(static_cast<std::size_t>(cfg.linearized.forcings));
    for (Forcing& f : forcings) {
        for (int m = 0; m < 3; ++m) {
            f.a[m] = 2.0 * U(rng) - 1.0;
            f.ph[m] = 2.0 * std::numbers::pi * U(rng);
        }
        f.b = U(rng);
        f.c = 1.0 + U(rng);
    }
    std::vector<double> level_max;
    json levels = json::array();
    json energy;
    for (int l = 0; l < cfg.linearized.levels; ++l) {
        const GridSpec g{static_cast<std::size_t>(10 << l) + 1, static_cast<std::size_t>(16 << l),
                         static_cast<std::size_t>(50 << l) + 1, T, L, 8.0};
        const ShearProfile shear = canonical_shear(g, cfg.shear.sigma, cfg.shear.beta);
        const BackgroundState bg = build_background_from_perturbation(Field(g), Field(g), shear);
        double worst = 0.0;
        std::vector<double> ratios;
        for (const Forcing& f : forcings) {
            const Field ft = Field::sample(g, [&](double t, double x, double y) {
                double s = 0.0;
                for (int m = 0; m < 3; ++m) s += f.a[m] * std::cos(2.0 * std::numbers::pi * (m + 1) * x / L + f.ph[m]);
                return t * s * (f.b + y) * std::exp(-f.c * y);
            });
            const VorticitySolution sol = solve_vorticity(bg, ft, nullptr, {4, cfg.norms.ell, &log});
            const double r = norm_A(sol.w, 0, cfg.norms.ell) / norm_A(ft, 0, cfg.norms.ell);
            ratios.push_back(r);
            worst = std::max(worst, r);
            if (l == cfg.linearized.levels - 1 && energy.is_null()) energy = sol.energy_json();
        }
        level_max.push_back(worst);
        levels.push_back({{"grid", grid_json(g)}, {"ratios", ratios}, {"max_ratio", worst}});
    }
    const double hi = *std::max_element(level_max.begin(), level_max.end());
    const double lo = *std::min_element(level_max.begin(), level_max.end());
    const double variation = hi > 0.0 ? (hi - lo) / hi : 0.0;
    out.phases.emplace_back("stability_constant", seconds_since(t0));
    out.checks.push_back(check_le("c07.constant_variation", 7, variation, 0.25,
                                  "(max - min) / max of the per-level worst ratio ||w|| / ||f~||"));

    out.text_files["mms_convergence.csv"] = csv.str();
    out.text_files["mms_error_vs_dy.dat"] = plot_series("dy", "linf_error", hs, es);
    std::vector<double> lv;
    for (int l = 0; l < cfg.linearized.levels; ++l) lv.push_back(l);
    out.text_files["stability_ratio_vs_level.dat"] = plot_series("level", "max_ratio", lv, level_max);
    out.json_files["mms.json"] = {{"cases", mms}, {"space_order", space_order}, {"time_order", time_order}};
    out.json_files["stability_constants.json"] = {{"levels", levels}, {"variation", variation}};
    out.json_files["energy_log.json"] = energy;
    return out;
}

ExperimentOutput run_nash_moser(const RunConfig& cfg, RunLog& log) {
    ExperimentOutput out;
    const IterationConfig& ic = cfg.iteration;
    const GridSpec& g = ic.grid;

    auto t0 = Clock::now();
    const ShearProfile shear = canonical_shear(g, cfg.shear.sigma, cfg.shear.beta);
    out.phases.emplace_back("shear", seconds_since(t0));
    t0 = Clock::now();
    const ConvergenceReport rep = run_iteration(ic, shear, cfg.shear.sigma, &log);
    const double run_seconds = seconds_since(t0);
    out.phases.emplace_back("iteration", run_seconds);

    const double disc = g.dt() * g.dt() + g.dx() * g.dx() + g.dy() * g.dy();
    double audit = 0.0;
    for (const IterationRecord& r : rep.records) audit = std::max({audit, r.audit_increment, r.audit_residual});
    const double rel = rep.initial_residual > 0.0 ? rep.final_residual / rep.initial_residual : 0.0;
    const std::string status = rep.reason + ", epsilon " + fmt_short(rep.epsilon_used);
    out.checks.push_back({"c08.monotone_after_2", 8, rep.monotone_after_2 && !rep.diverged, rep.monotone_after_2 ? 1.0 : 0.0,
                          1.0, ">=", status});
    out.checks.push_back(check_le("c08.residual_reduction", 8, rel, 1e-4,
                                  "final / initial after " + std::to_string(rep.iterations) + " iterations"));
    out.checks.push_back(check_le("c08.robin_relative", 8, rep.robin_relative, 1e-6));
    out.checks.push_back(check_le("c08.audits", 8, audit, 10.0 * disc, "10 (dt^2 + dx^2 + dy^2)"));
    out.checks.push_back(check_le("c08.runtime_seconds", 8, run_seconds, 300.0));
    out.checks.push_back(check_in("c09.rate_slope", 9, rep.rate_fit.slope, 1.0, 0.5,
                                  "log ||du^n|| vs log(theta_n^{3-k~} dtheta_n), n >= 2"));

    const std::vector<ScheduleSum> sums = schedule_sum_check(ic.theta0, ic.k_tilde, 200);
    double drift = 0.0, bound = 0.0;
    json sums_json = json::array();
    for (const ScheduleSum& s : sums) {
        drift = std::max(drift, s.drift);
        bound = std::max(bound, s.max_ratio);
        sums_json.push_back({{"k", s.k}, {"drift", s.drift}, {"max_ratio", s.max_ratio}, {"ratios", s.ratios}});
        std::vector<double> js;
        for (std::size_t j = 1; j <= s.ratios.size(); ++j) js.push_back(static_cast<double>(j));
        out.text_files["schedule_ratio_k" + std::to_string(s.k) + ".dat"] = plot_series("j", "ratio", js, s.ratios);
    }
    out.checks.push_back(check_le("c10.schedule_drift", 10, drift, 0.10, "max over k of (max - min) / max for j in [100, 200]"));
    out.checks.push_back({"c10.schedule_bounded", 10, std::isfinite(bound), bound, 0.0, "finite", "largest ratio"});

    json conv = rep.to_json();
    out.json_files["convergence.json"] = conv;
    out.json_files["schedule_sum.json"] = {{"theta0", ic.theta0}, {"k_tilde", ic.k_tilde}, {"j_max", 200}, {"sums", sums_json}};
    std::ostringstream csv;
    csv << "n,theta,dtheta,du_norm,e_norm,f_norm,residual,guard_margin,min_uy,robin_residual,audit_increment,"
           "audit_residual,defect_sum,telescoping,reconstruction\n";
    std::vector<double> ns, res, xs, dus, gms;
    for (const IterationRecord& r : rep.records) {
        csv << r.n << "," << fmt(r.theta) << "," << fmt(r.dtheta) << "," << fmt(r.du_norm) << "," << fmt(r.e_norm) << ","
            << fmt(r.f_norm) << "," << fmt(r.residual) << "," << fmt(r.guard_margin) << "," << fmt(r.min_uy) << ","
            << fmt(r.robin_residual) << "," << fmt(r.audit_increment) << "," << fmt(r.audit_residual) << ","
            << fmt(r.defect_sum) << "," << fmt(r.telescoping) << "," << fmt(r.reconstruction) << "\n";
        ns.push_back(r.n);
        res.push_back(r.residual);
        xs.push_back(std::pow(r.theta, 3.0 - ic.k_tilde) * r.dtheta);
        dus.push_back(r.du_norm);
        gms.push_back(r.guard_margin);
    }
    out.text_files["convergence.csv"] = csv.str();
    out.text_files["residual_vs_n.dat"] = plot_series("n", "residual", ns, res);
    out.text_files["du_vs_rate.dat"] = plot_series("theta_pow_dtheta", "du_norm", xs, dus);
    out.text_files["guard_margin_vs_n.dat"] = plot_series("n", "guard_margin", ns, gms);
    return out;
}

ExperimentOutput run_stability(const RunConfig& cfg, RunLog& log) {
    ExperimentOutput out;
    const IterationConfig& ic = cfg.iteration;
    auto t0 = Clock::now();
    const ShearProfile shear = canonical_shear(ic.grid, cfg.shear.sigma, cfg.shear.beta);
    const double e = cfg.stability.epsilon, gap = cfg.stability.gap;
    const StabilityReport same = stability_experiment(e, e, shear, cfg.shear.sigma, ic, &log);
    out.phases.emplace_back("identical_data", seconds_since(t0));
    t0 = Clock::now();
    const StabilityReport full = stability_experiment(e, e + gap, shear, cfg.shear.sigma, ic, &log);
    const StabilityReport half = stability_experiment(e, e + 0.5 * gap, shear, cfg.shear.sigma, ic, &log);
    out.phases.emplace_back("gap_scan", seconds_since(t0));
    const double ratio = full.difference_norm > 0.0 ? half.difference_norm / full.difference_norm : 0.0;
    out.checks.push_back(check_le("c11.identical_data", 11, same.difference_norm, 1e-10));
    out.checks.push_back({"c11.runs_converged_or_ran", 11, full.both_converged && half.both_converged,
                          full.both_converged && half.both_converged ? 1.0 : 0.0, 1.0, ">=",
                          full.note.empty() ? half.note : full.note});
    out.checks.push_back(check_in("c11.halved_gap", 11, ratio, 0.5, 0.1, "difference(gap / 2) / difference(gap)"));
    out.json_files["stability.json"] = {{"identical", same.to_json()}, {"full_gap", full.to_json()},
                                        {"half_gap", half.to_json()},  {"ratio", ratio},
                                        {"epsilon", e},                {"gap", gap}};
    out.text_files["difference_vs_gap.dat"] =
        plot_series("data_gap", "difference_norm", {half.data_gap, full.data_gap}, {half.difference_norm, full.difference_norm});
    return out;
}

ExperimentOutput run_dirichlet_limit(const RunConfig& cfg, RunLog& log) {
    ExperimentOutput out;
    auto t0 = Clock::now();
    const DirichletScan scan = dirichlet_limit(cfg.dirichlet.betas, cfg.shear.sigma, cfg.iteration, &log);
    out.phases.emplace_back("scan", seconds_since(t0));
    out.checks.push_back(check_in("c12.trace_slope", 12, scan.fit.slope, -0.5, 0.1,
                                  "log ||(u - u^s)|_{y=0}|| vs log beta"));
    out.json_files["dirichlet.json"] = scan.to_json();
    std::vector<double> bs, ns;
    for (const DirichletPoint& p : scan.points) {
        bs.push_back(p.beta);
        ns.push_back(p.trace_norm);
    }
    out.text_files["trace_vs_beta.dat"] = plot_series("beta", "trace_norm", bs, ns);
    return out;
}

namespace {

// Adaptive Simpson quadrature, independent of the grid trapezoid.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 40) {
    const std::function<double(double, double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double eps, int d) {
            const double mid = 0.5 * (lo + hi), lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
            const double flm = f(lm), frm = f(rm);
            const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
            const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
            if (d <= 0 || std::abs(left + right - whole) <= 15.0 * eps) return left + right + (left + right - whole) / 15.0;
            return rec(lo, mid, flo, flm, fmid, left, 0.5 * eps, d - 1) + rec(mid, hi, fmid, frm, fhi, right, 0.5 * eps, d - 1);
        };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, depth);
}

double rel_err(double v, double ref) { return std::abs(v - ref) / std::max(std::abs(ref), 1e-300); }

}  // namespace

ExperimentOutput run_norms_audit(const RunConfig& cfg, RunLog& log) {
    ExperimentOutput out;
    auto t0 = Clock::now();
    const GridSpec g{41, cfg.grid.n_x, cfg.grid.n_y, cfg.grid.t_max, cfg.grid.x_len, cfg.grid.y_max};
    const double T = g.t_max, L = g.x_len, ell = cfg.norms.ell;

    // index sets
    std::ostringstream csv;
    csv << "k,k1,k2\n";
    json sets = json::object();
    for (int k = 0; k <= cfg.norms.k_max + 1; ++k) {
        json arr = json::array();
        for (const IndexPair& p : index_set(k)) {
            csv << k << "," << p.first << "," << p.second << "\n";
            arr.push_back({p.first, p.second});
        }
        sets[std::to_string(k)] = arr;
    }
    const auto s1 = index_set(1), s2 = index_set(2);
    const std::vector<IndexPair> want1{{0, 0}, {0, 1}, {0, 2}, {1, 0}};
    const bool ok1 = std::is_permutation(s1.begin(), s1.end(), want1.begin(), want1.end());
    auto has = [&](const std::vector<IndexPair>& s, IndexPair p) { return std::find(s.begin(), s.end(), p) != s.end(); };
    const bool ok2 = has(s2, {0, 4}) && has(s2, {1, 2}) && !has(s2, {1, 3}) && !has(s2, {2, 1});
    out.checks.push_back({"norms.index_sets", 0, ok1 && ok2, ok1 && ok2 ? 1.0 : 0.0, 1.0, ">=", "k = 1 and k = 2 membership"});

    // A oracle: <y>^{-2}, weight <y>^ell
    const Field f_inv = Field::sample(g, [](double, double, double y) { return 1.0 / (1.0 + y * y); });
    const double a_num = norm_A(f_inv, 0, ell);
    const double a_ref = std::sqrt(T * L * adaptive_simpson([ell](double y) { return std::pow(1.0 + y * y, ell - 2.0); },
                                                            0.0, g.y_max, 1e-12));
    out.checks.push_back(check_le("norms.A_quadrature_oracle", 0, rel_err(a_num, a_ref), 1e-3));

    // boundary oracles
    const double kx = 2.0 * std::numbers::pi / L;
    const Field sine = Field::sample_trace(g, [kx](double, double x) { return std::sin(kx * x); });
    const double b0 = norm_boundary_A(sine, 0), b1 = norm_boundary_A(sine, 1);
    const double b0_ref = std::sqrt(T * L / 2.0);
    out.checks.push_back(check_le("norms.boundary_k0", 0, rel_err(b0, b0_ref), 1e-3));
    // the central x-difference of sin(kx x) has symbol sin(kx dx) / dx
    const double kh = std::sin(kx * g.dx()) / g.dx();
    const double b1_ref = b0_ref * std::sqrt(1.0 + kh * kh);
    out.checks.push_back(check_le("norms.boundary_k1", 0, rel_err(b1, b1_ref), 1e-3,
                                  "continuum value " + fmt_short(b0_ref * std::sqrt(1.0 + kx * kx))));

    // D family at k = 0, ell = 0
    const Field ed = Field::sample(g, [kx](double, double x, double y) { return std::exp(-y) * std::sin(kx * x); });
    MixedParams pd;
    pd.k = 0;
    pd.ell = 0.0;
    const double dn = norm_mixed(ed, MixedFamily::D, pd);
    out.checks.push_back(check_le("norms.D_family_oracle", 0, rel_err(dn, b0_ref), 1e-3));

    // homogeneity, triangle inequality, monotonicity in k, weight monotonicity
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    auto random_smooth = [&]() {
        const double a = U(rng), b = U(rng), c = U(rng), ph = U(rng) * std::numbers::pi;
        return Field::sample(g, [=](double t, double x, double y) {
            return (a + b * t + c * std::sin(kx * x + ph)) * std::exp(-0.5 * y) * (1.0 + y);
        });
    };
    const Field rf = random_smooth(), rg = random_smooth();
    const double nf = norm_A(rf, 1, ell), ng = norm_A(rg, 1, ell);
    const double homog = rel_err(norm_A(-2.5 * rf, 1, ell), 2.5 * nf);
    out.checks.push_back(check_le("norms.homogeneity", 0, homog, 1e-12));
    const double tri = norm_A(rf + rg, 1, ell) - nf - ng;
    out.checks.push_back(check_le("norms.triangle", 0, tri, 1e-12));
    double mono = -std::numeric_limits<double>::infinity();
    json by_k = json::array();
    for (int k = 0; k < cfg.norms.k_max; ++k) {
        const double lo = norm_A(rf, k, ell), hi = norm_A(rf, k + 1, ell);
        mono = std::max(mono, lo - hi);
        by_k.push_back({{"k", k}, {"A_k", lo}, {"A_k+1", hi}});
    }
    out.checks.push_back(check_le("norms.monotone_in_k", 0, mono, 0.0));
    const Field far = Field::sample(g, [](double, double x, double y) {
        return y >= 1.0 ? (y - 1.0) * (y - 1.0) * std::exp(-y) * (1.0 + 0.3 * std::cos(x)) : 0.0;
    });
    const double wm = norm_A(far, 0, ell) - norm_A(far, 0, ell + 1.0);
    out.checks.push_back(check_le("norms.weight_monotone", 0, wm, 0.0));

    const NormReport report = evaluate_norms(rf, cfg.norms.k_max, ell);
    out.phases.emplace_back("audit", seconds_since(t0));

    out.text_files["index_sets.csv"] = csv.str();
    out.json_files["norms_audit.json"] = {
        {"index_sets", sets},
        {"oracles",
         {{"A_inverse_square", {{"computed", a_num}, {"oracle", a_ref}}},
          {"boundary_sine_k0", {{"computed", b0}, {"oracle", b0_ref}}},
          {"boundary_sine_k1", {{"computed", b1}, {"oracle", b1_ref}}},
          {"D_family", {{"computed", dn}, {"oracle", b0_ref}}}}},
        {"random_field_norms", report.to_json()},
        {"monotone_in_k", by_k}};
    (void)log;
    return out;
}

ExperimentOutput dispatch_experiment(const RunConfig& cfg, RunLog& log) {
    const std::string& e = cfg.experiment;
    if (e == "shear") return run_shear(cfg, log);
    if (e == "mollify") return run_mollify(cfg, log);
    if (e == "linearized-mms") return run_linearized_mms(cfg, log);
    if (e == "nash-moser") return run_nash_moser(cfg, log);
    if (e == "stability") return run_stability(cfg, log);
    if (e == "dirichlet-limit") return run_dirichlet_limit(cfg, log);
    if (e == "norms-audit") return run_norms_audit(cfg, log);
    throw ConfigError("unknown experiment '" + e + "'; valid: " + join_tags());
}

// ---------------------------------------------------------------- manifest

json RunManifest::to_json() const {
    json ph = json::object();
    for (const auto& [k, v] : phases) ph[k] = v;
    json ch = json::array();
    for (const CheckResult& c : checks) ch.push_back(c.to_json());
    return {{"experiment", experiment},
            {"status", status},
            {"exit_code", exit_code},
            {"error", error},
            {"partial", status == "error"},
            {"config", config},
            {"defaults", defaulted},
            {"versions",
             {{"prandtl_robin", kVersion},
              {"nlohmann_json",
               std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                   std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
#if defined(__VERSION__)
              {"compiler", __VERSION__},
#endif
              {"cxx", static_cast<long>(__cplusplus)}}},
            {"wall_clock_seconds", ph},
            {"checks", ch},
            {"files", files},
            {"warnings", warnings}};
}

RunManifest run_experiment(const RunConfig& cfg) {
    RunManifest m;
    m.experiment = cfg.experiment;
    m.config = cfg.to_json();
    m.defaulted = cfg.defaulted;
    namespace fs = std::filesystem;
    const fs::path dir(cfg.output_dir);
    RunLog log;
    ExperimentOutput out;
    const auto t0 = Clock::now();
    try {
        fs::create_directories(dir);
        out = dispatch_experiment(cfg, log);
        m.checks = out.checks;
        m.phases = out.phases;
        const bool ok = std::all_of(m.checks.begin(), m.checks.end(), [](const CheckResult& c) { return c.pass; });
        m.status = ok ? "pass" : "fail";
        m.exit_code = ok ? exit_pass : exit_check_failed;
    } catch (const ConfigError& e) {
        m.status = "error";
        m.error = e.what();
        m.exit_code = exit_config_error;
    } catch (const StructuralError& e) {
        m.status = "error";
        m.error = e.what();
        m.exit_code = exit_config_error;
    } catch (const std::exception& e) {
        m.status = "error";
        m.error = e.what();
        m.exit_code = exit_numerical_failure;
    }
    m.phases.emplace_back("total", seconds_since(t0));
    m.warnings = log.messages();
    try {
        for (const auto& [name, j] : out.json_files) {
            std::ofstream(dir / name) << j.dump(2) << "\n";
            m.files.push_back(name);
        }
        for (const auto& [name, text] : out.text_files) {
            std::ofstream(dir / name) << text;
            m.files.push_back(name);
        }
        m.files.push_back("manifest.json");
        std::ofstream(dir / "manifest.json") << m.to_json().dump(2) << "\n";
    } catch (const std::exception& e) {
        if (m.error.empty()) m.error = std::string("writing outputs: ") + e.what();
        m.status = "error";
        m.exit_code = exit_numerical_failure;
    }
    return m;
}

}  // namespace prandtl
