// delaycert command-line front end.

#include "config.hpp"

#include "delaycert/error.hpp"
#include "delaycert/properties.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace delaycert;
using namespace delaycert::cli;

namespace {

constexpr int kExitConfig = 64;
constexpr int kExitInternal = 70;
constexpr const char* kOutputEnv = "DELAYCERT_OUTPUT_DIR";

// Everything is rendered in memory first so a failing command leaves no files behind.
class Outputs {
public:
    explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

    void add(const std::string& name, std::string content) { files_[name] = std::move(content); }

    void commit() const
    {
        fs::create_directories(dir_);
        for (const auto& [name, content] : files_) {
            const fs::path target = dir_ / name;
            const fs::path tmp = dir_ / (name + ".tmp");
            {
                std::ofstream out(tmp, std::ios::binary);
                out << content;
                if (!out) throw std::runtime_error("cannot write " + tmp.string());
            }
            fs::rename(tmp, target);
        }
    }

    [[nodiscard]] fs::path path(const std::string& name) const { return dir_ / name; }

private:
    fs::path dir_;
    std::map<std::string, std::string> files_;
};

struct Common {
    std::string config_path;
    std::string preset;
    std::string out_dir;
    std::string split_reading;
    std::optional<double> h, mu, k;
};

void add_common(CLI::App* cmd, Common& c, bool with_params)
{
    cmd->add_option("--config", c.config_path, "JSON run configuration");
    cmd->add_option("--preset", c.preset, "built-in model: example1, example2, example3");
    cmd->add_option("--out", c.out_dir, "output directory (overrides config and " + std::string(kOutputEnv) + ")");
    cmd->add_option("--split-reading", c.split_reading, "from-interval-end | split-as-delay");
    if (with_params) {
        cmd->add_option("--h", c.h, "delay upper bound");
        cmd->add_option("--mu", c.mu, "delay-derivative bound");
        cmd->add_option("--k", c.k, "exponential rate");
    }
}

RunConfig resolve(const Common& c)
{
    RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_config(c.config_path);
    if (!c.preset.empty()) apply_preset(cfg, c.preset);
    if (c.h) cfg.h = *c.h;
    if (c.mu) cfg.mu = *c.mu;
    if (c.k) cfg.k = *c.k;
    if (!c.split_reading.empty()) {
        auto r = parse_split_reading(c.split_reading);
        if (!r) throw ConfigError("--split-reading", "expected from-interval-end or split-as-delay");
        cfg.assembly.split_reading = *r;
    }
    if (const char* env = std::getenv(kOutputEnv); env && *env) cfg.output_dir = env;
    if (!c.out_dir.empty()) cfg.output_dir = c.out_dir;
    return cfg;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json coefficients_json(const WeightedBasisCoefficients& c)
{
    return json{{"w", c.w},   {"c1", c.c1}, {"c2", c.c2}, {"c3", c.c3}, {"c4", c.c4},   {"q0", c.q0},
                {"q1", c.q1}, {"q2", c.q2}, {"q3", c.q3}, {"q13", c.q13}, {"split", c.split}, {"from_series", c.from_series}};
}

json solver_json(const SdpSolution& s)
{
    return json{{"status", s.status == SolverStatus::Optimal ? "optimal" : "numerical-failure"},
                {"iterations", s.iterations},
                {"primal_objective", s.primal_objective},
                {"dual_objective", s.dual_objective},
                {"primal_infeasibility", s.primal_infeasibility},
                {"dual_infeasibility", s.dual_infeasibility}};
}

json probe_json(const Probe& p)
{
    return json{{"param", p.param}, {"status", to_string(p.status)}, {"margin", p.margin}, {"retry", p.retry}};
}

json search_json(const SearchResult& r)
{
    json probes = json::array(), scan = json::array();
    for (const auto& p : r.probes) probes.push_back(probe_json(p));
    for (const auto& p : r.post_scan) scan.push_back(probe_json(p));
    return json{{"mode", to_string(r.mode)},     {"optimum", r.optimum},
                {"bracket", {r.lo, r.hi}},       {"iterations", r.iterations},
                {"indeterminate", r.indeterminate}, {"low_confidence", r.low_confidence},
                {"post_scan_clean", r.post_scan_clean}, {"warnings", r.warnings},
                {"probes", probes},              {"post_scan", scan}};
}

json assembly_json(const AssemblyOptions& a)
{
    return json{{"split_reading", to_string(a.split_reading)}, {"scale_mean_term_by_h", a.scale_mean_term_by_h}};
}

int cmd_analyze(const Common& c, bool dump_lmi, bool dump_conic)
{
    const RunConfig cfg = resolve(c);
    const NetworkModel& model = require_model(cfg);
    const AnalysisParams params = require_params(cfg);

    const auto coeffs = compute_coefficients(Interval{0.0, params.h, params.k}, cfg.quad_tol, cfg.root_tol);
    const LmiSystem system = build_theorem_lmis(model, params, coeffs, cfg.assembly);
    const FeasibilityReport report = decide(system, cfg.solver);

    json j;
    j["model"] = cfg.model_name;
    j["params"] = {{"h", params.h}, {"mu", params.mu}, {"k", params.k}};
    j["assembly"] = assembly_json(cfg.assembly);
    j["coefficients"] = coefficients_json(coeffs);
    j["xi_delay"] = system.xi_delay;
    j["decision_variables"] = system.registry.count();
    j["status"] = to_string(report.status);
    j["margin"] = report.margin;
    j["margin_threshold"] = kMarginThreshold;
    j["solver"] = solver_json(report.solver);
    if (report.certification) {
        json cons = json::array();
        for (const auto& cc : report.certification->constraints)
            cons.push_back({{"name", cc.name},
                            {"sense", cc.sense == Sense::NegativeDefinite ? "lt0" : "gt0"},
                            {"extreme_eigenvalue", cc.extreme_eigenvalue},
                            {"slack", cc.slack}});
        j["certification"] = {{"pass", report.certification->pass},
                              {"strict", report.certification->strict},
                              {"min_slack", report.certification->min_slack},
                              {"cert_tol", kCertTol},
                              {"constraints", cons}};
    }
    if (report.status == FeasibilityStatus::Feasible && report.witness) {
        const auto ov = compute_overshoot(system.registry, *report.witness, model, params);
        json terms = json::object();
        for (const auto& [name, v] : ov.terms) terms[name] = v;
        j["overshoot"] = {{"H", ov.H}, {"Lambda", ov.lambda}, {"lambda_min_P", ov.lambda_min_P}, {"terms", terms}};
    }

    Outputs out(cfg.output_dir);
    out.add("analyze.json", dump(j));
    if (dump_lmi) {
        std::ostringstream s;
        write_lmi_system(s, system);
        out.add("lmi.txt", s.str());
    }
    if (dump_conic) {
        std::ostringstream s;
        write_conic_problem(s, to_conic(system));
        out.add("conic.txt", s.str());
    }
    out.commit();
    std::cout << to_string(report.status) << " margin=" << report.margin << " -> " << out.path("analyze.json").string()
              << "\n";
    switch (report.status) {
    case FeasibilityStatus::Feasible: return 0;
    case FeasibilityStatus::Infeasible: return 1;
    case FeasibilityStatus::NumericalFailure: return 2;
    }
    return kExitInternal;
}

int cmd_search(const Common& c, const std::string& mode_flag, std::optional<double> lo, std::optional<double> hi,
               std::optional<double> tol)
{
    RunConfig cfg = resolve(c);
    const NetworkModel& model = require_model(cfg);
    if (!mode_flag.empty()) {
        if (mode_flag == "max-delay")
            cfg.search_mode = SearchMode::MaxDelay;
        else if (mode_flag == "max-rate")
            cfg.search_mode = SearchMode::MaxRate;
        else
            throw ConfigError("--mode", "expected max-delay or max-rate");
    }
    if (!cfg.search_mode) throw ConfigError("search.mode", "required");
    SearchSpec spec = default_search_spec(*cfg.search_mode, model);
    if (cfg.search_lo) spec.lo = *cfg.search_lo;
    if (cfg.search_hi) spec.hi = *cfg.search_hi;
    if (lo) spec.lo = *lo;
    if (hi) spec.hi = *hi;
    spec.tolerance = tol ? *tol : cfg.search_tolerance;
    spec.max_iters = cfg.search_max_iters;
    spec.solver = cfg.solver;
    spec.assembly = cfg.assembly;
    if (!cfg.mu) throw ConfigError("params.mu", "required");

    SearchResult res;
    json fixed;
    if (spec.mode == SearchMode::MaxDelay) {
        if (!cfg.k) throw ConfigError("params.k", "required for max-delay");
        res = max_delay(model, *cfg.mu, *cfg.k, spec);
        fixed = {{"mu", *cfg.mu}, {"k", *cfg.k}};
    } else {
        if (!cfg.h) throw ConfigError("params.h", "required for max-rate");
        res = max_rate(model, *cfg.h, *cfg.mu, spec);
        fixed = {{"mu", *cfg.mu}, {"h", *cfg.h}};
    }
    json j = search_json(res);
    j["model"] = cfg.model_name;
    j["fixed"] = fixed;
    j["tolerance"] = spec.tolerance;
    j["assembly"] = assembly_json(spec.assembly);
    Outputs out(cfg.output_dir);
    out.add("search.json", dump(j));
    out.commit();
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
    std::printf("%s optimum=%.6f iterations=%d\n", std::string(to_string(res.mode)).c_str(), res.optimum,
                res.iterations);
    return 0;
}

std::string iso_timestamp()
{
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

int cmd_reproduce(const Common& c, int example_id, int jobs, bool fractions, std::optional<double> tol)
{
    RunConfig cfg = resolve(c);
    (void)table_setup(example_id); // rejects unknown ids before any work
    ReproduceOptions opts;
    opts.jobs = jobs;
    opts.check_fractions = fractions;
    opts.overrides.tolerance = tol ? *tol : cfg.search_tolerance;
    opts.overrides.max_iters = cfg.search_max_iters;
    opts.overrides.solver = cfg.solver;
    opts.overrides.assembly = cfg.assembly;

    const auto start = std::chrono::steady_clock::now();
    const auto rows = reproduce_table(example_id, opts);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::ostringstream csv;
    write_table_csv(csv, rows);

    json cells = json::array();
    bool any_error = false;
    for (const auto& r : rows) {
        json cell{{"mu", r.mu}, {"fixed", r.fixed}, {"reference", r.reference}, {"confidence", r.confidence}};
        if (r.confidence == "error") {
            any_error = true;
            cell["error"] = r.error;
        } else {
            cell["bound"] = r.bound;
            cell["deviation"] = r.deviation;
            cell["within_one_percent"] = std::abs(r.deviation) <= 0.01;
            cell["search"] = search_json(*r.search);
        }
        if (r.at_lower && r.at_upper)
            cell["fraction_check"] = {{"at_0_97", to_string(r.at_lower->status)},
                                      {"at_1_05", to_string(r.at_upper->status)},
                                      {"holds", r.at_lower->status == FeasibilityStatus::Feasible &&
                                                    r.at_upper->status == FeasibilityStatus::Infeasible}};
        cells.push_back(cell);
    }
    const TableSetup setup = table_setup(example_id);
    json manifest{{"table", example_id},
                  {"mode", to_string(setup.mode)},
                  {"fixed", setup.fixed},
                  {"tolerance", opts.overrides.tolerance},
                  {"jobs", jobs},
                  {"assembly", assembly_json(opts.overrides.assembly)},
                  {"solver", {{"tol", opts.overrides.solver.tol}, {"max_iters", opts.overrides.solver.max_iters}}},
                  {"cells", cells},
                  {"elapsed_seconds", seconds},
                  {"timestamp", iso_timestamp()}};

    const std::string stem = "table" + std::to_string(example_id);
    Outputs out(cfg.output_dir);
    out.add(stem + ".csv", csv.str());
    out.add(stem + "_manifest.json", dump(manifest));
    out.commit();
    std::cout << csv.str();
    return any_error ? 1 : 0;
}

Eigen::VectorXd parse_vector(const std::string& text, const std::string& what)
{
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            vals.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(what, "cannot parse '" + item + "' as a number");
        }
    }
    if (vals.empty()) throw ConfigError(what, "empty vector");
    return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

int cmd_simulate(const Common& c, const std::string& z0_text, std::optional<double> h0, std::optional<double> amp,
                 std::optional<double> freq, std::optional<double> t_end, std::optional<double> dt,
                 std::optional<double> env_H, std::optional<double> env_k)
{
    RunConfig cfg = resolve(c);
    const NetworkModel& model = require_model(cfg);
    if (!z0_text.empty()) cfg.z0 = parse_vector(z0_text, "--z0");
    if (h0 || amp || freq) {
        DelayFunction d = cfg.delay.value_or(DelayFunction{});
        if (h0) d.h0 = *h0;
        if (amp) d.amplitude = *amp;
        if (freq) d.frequency = *freq;
        cfg.delay = d;
    }
    if (t_end) cfg.t_end = *t_end;
    if (dt) cfg.dt = *dt;
    if (!cfg.delay) throw ConfigError("delay", "required");
    if (!cfg.z0) throw ConfigError("z0", "required");
    if (cfg.z0->size() != model.dimension()) throw ConfigError("z0", "length differs from the model dimension");
    if (cfg.delay->h0 < std::abs(cfg.delay->amplitude)) throw ConfigError("delay", "h0 must be at least |amplitude|");
    if (env_H.has_value() != env_k.has_value()) throw ConfigError("--envelope-H/--envelope-k", "give both or neither");

    const Trajectory traj = simulate(model, *cfg.delay, *cfg.z0, cfg.t_end, cfg.dt);
    std::ostringstream csv;
    write_trajectory_csv(csv, traj);

    json meta{{"model", cfg.model_name},
              {"network", model_to_json(model)},
              {"delay", {{"h0", cfg.delay->h0}, {"amplitude", cfg.delay->amplitude}, {"frequency", cfg.delay->frequency}}},
              {"z0", std::vector<double>(cfg.z0->data(), cfg.z0->data() + cfg.z0->size())},
              {"history", "constant"},
              {"integrator", "rk4"},
              {"dt", cfg.dt},
              {"t_end", cfg.t_end},
              {"samples", traj.size()},
              {"final_norm", traj.z.back().norm()}};
    try {
        meta["decay_rate_estimate"] = {{"window", {0.5 * cfg.t_end, cfg.t_end}},
                                       {"k_est", estimate_decay_rate(traj, 0.5 * cfg.t_end, cfg.t_end)}};
    } catch (const Error&) {
        meta["decay_rate_estimate"] = nullptr;
    }
    if (env_H) {
        const auto env = check_envelope(traj, *env_H, *env_k);
        meta["envelope"] = {{"H", env.H},
                            {"k", env.k},
                            {"pass", env.pass()},
                            {"violations", env.violations.size()},
                            {"worst_ratio", env.worst_ratio}};
    }
    Outputs out(cfg.output_dir);
    out.add("trajectory.csv", csv.str());
    out.add("trajectory.json", dump(meta));
    out.commit();
    std::cout << "wrote " << traj.size() << " samples to " << out.path("trajectory.csv").string() << "\n";
    return 0;
}

int cmd_verify(const Common& c, std::optional<std::uint64_t> seed, std::optional<int> count, double tol)
{
    RunConfig cfg = resolve(c);
    const std::uint64_t s = seed.value_or(cfg.seed);
    const int n = count.value_or(cfg.count);
    if (n < 1) throw ConfigError("--count", "must be positive");
    const auto report = run_inequality_properties(s, n, tol);
    json props = json::array();
    for (const auto& p : report.properties) {
        props.push_back({{"name", p.name},
                         {"trials", p.trials},
                         {"violations", p.violations},
                         {"errors", p.errors},
                         {"worst_slack", p.worst_slack},
                         {"notes", p.notes}});
        std::printf("%-36s %5d trials  %d violations  %d errors  worst slack %.3e\n", p.name.c_str(), p.trials,
                    p.violations, p.errors, p.worst_slack);
    }
    json j{{"seed", s}, {"count", n}, {"tolerance", tol}, {"properties", props},
           {"total_failures", report.total_failures()}};
    Outputs out(cfg.output_dir);
    out.add("verify.json", dump(j));
    out.commit();
    std::printf("%d violations\n", report.total_failures());
    return report.total_failures() == 0 ? 0 : 1;
}

void print_error(const std::string& code, const std::string& message)
{
    std::cerr << json{{"error", code}, {"message", message}}.dump() << "\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exponential stability certificates for delayed neural networks"};
    app.set_help_flag("--help", "print help and exit");
    app.require_subcommand(1);

    Common common;
    bool dump_lmi = false, dump_conic = false;
    auto* analyze = app.add_subcommand("analyze", "decide feasibility at one (h, mu, k)");
    add_common(analyze, common, true);
    analyze->add_flag("--dump-lmi", dump_lmi, "also write lmi.txt");
    analyze->add_flag("--dump-conic", dump_conic, "also write conic.txt");

    std::string mode;
    std::optional<double> lo, hi, tol;
    auto* search = app.add_subcommand("search", "bisection for the largest delay or rate");
    add_common(search, common, true);
    search->add_option("--mode", mode, "max-delay | max-rate");
    search->add_option("--lo", lo);
    search->add_option("--hi", hi);
    search->add_option("--tolerance", tol);

    int table = 0, jobs = 1;
    bool no_fractions = false;
    auto* reproduce = app.add_subcommand("reproduce", "rerun a benchmark table");
    add_common(reproduce, common, false);
    reproduce->add_option("table", table, "1, 2 or 3")->required();
    reproduce->add_option("--jobs", jobs, "cells solved concurrently")->check(CLI::PositiveNumber);
    reproduce->add_option("--tolerance", tol);
    reproduce->add_flag("--no-fraction-check", no_fractions, "skip the probes at 0.97 and 1.05 of the reference");

    std::string z0;
    std::optional<double> h0, amp, freq, t_end, dt, env_H, env_k;
    auto* simulate_cmd = app.add_subcommand("simulate", "integrate the delayed network");
    add_common(simulate_cmd, common, false);
    simulate_cmd->add_option("--z0", z0, "comma-separated initial state");
    simulate_cmd->add_option("--h0", h0);
    simulate_cmd->add_option("--amplitude", amp);
    simulate_cmd->add_option("--frequency", freq);
    simulate_cmd->add_option("--t-end", t_end);
    simulate_cmd->add_option("--dt", dt);
    simulate_cmd->add_option("--envelope-H", env_H);
    simulate_cmd->add_option("--envelope-k", env_k);

    std::optional<std::uint64_t> seed;
    std::optional<int> count;
    double prop_tol = 1e-8;
    auto* verify = app.add_subcommand("verify-inequalities", "randomized checks of the integral inequalities");
    add_common(verify, common, false);
    verify->add_option("--seed", seed);
    verify->add_option("--count", count);
    verify->add_option("--tolerance", prop_tol);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("UsageError", e.what());
        return kExitConfig;
    }

    try {
        if (analyze->parsed()) return cmd_analyze(common, dump_lmi, dump_conic);
        if (search->parsed()) return cmd_search(common, mode, lo, hi, tol);
        if (reproduce->parsed()) return cmd_reproduce(common, table, jobs, !no_fractions, tol);
        if (simulate_cmd->parsed()) return cmd_simulate(common, z0, h0, amp, freq, t_end, dt, env_H, env_k);
        if (verify->parsed()) return cmd_verify(common, seed, count, prop_tol);
    } catch (const ConfigError& e) {
        print_error("ConfigError", e.what());
        return kExitConfig;
    } catch (const Error& e) {
        print_error(std::string(to_string(e.code())), e.what());
        if (e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::InvalidParams ||
            e.code() == ErrorCode::InvalidModel || e.code() == ErrorCode::BracketInvalid)
            return kExitConfig;
        return 1;
    } catch (const std::exception& e) {
        print_error("Internal", e.what());
        return kExitInternal;
    }
    return kExitInternal;
}
