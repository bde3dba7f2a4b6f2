#include "config.hpp"

#include "delaycert/error.hpp"

#include <cmath>
#include <fstream>

namespace delaycert::cli {

using nlohmann::json;

namespace {

double number(const json& j, const std::string& path)
{
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
    return v;
}

Eigen::VectorXd numbers(const json& j, const std::string& path, std::optional<Eigen::Index> expected = {})
{
    if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
    if (expected && static_cast<Eigen::Index>(j.size()) != *expected)
        throw ConfigError(path, "expected " + std::to_string(*expected) + " entries, got " + std::to_string(j.size()));
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], path + "[" + std::to_string(i) + "]");
    return v;
}

Eigen::MatrixXd row_major(const json& j, const std::string& path, Eigen::Index n)
{
    const Eigen::VectorXd flat = numbers(j, path, n * n);
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) m(r, c) = flat(r * n + c);
    return m;
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed)
{
    if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(path.empty() ? key : path + "." + key, "unknown field");
    }
}

NetworkModel parse_model(const json& j)
{
    check_keys(j, "model", {"preset", "n", "A", "B", "C", "L"});
    if (j.contains("preset")) {
        if (j.size() != 1) throw ConfigError("model", "a preset cannot be combined with explicit matrices");
        if (!j["preset"].is_string()) throw ConfigError("model.preset", "expected a string");
        auto m = preset_model(j["preset"].get<std::string>());
        if (!m) throw ConfigError("model.preset", "unknown preset '" + j["preset"].get<std::string>() + "'");
        return *m;
    }
    for (const char* f : {"n", "A", "B", "C", "L"})
        if (!j.contains(f)) throw ConfigError(std::string("model.") + f, "required");
    if (!j["n"].is_number_integer() || j["n"].get<long>() < 1) throw ConfigError("model.n", "expected a positive integer");
    const auto n = static_cast<Eigen::Index>(j["n"].get<long>());
    NetworkModel m;
    m.A = row_major(j["A"], "model.A", n);
    m.B = row_major(j["B"], "model.B", n);
    m.C = row_major(j["C"], "model.C", n);
    m.L = numbers(j["L"], "model.L", n);
    try {
        m.validate();
    } catch (const Error& e) {
        throw ConfigError("model", e.what());
    }
    return m;
}

} // namespace

std::optional<SplitReading> parse_split_reading(const std::string& s)
{
    if (s == "from-interval-end") return SplitReading::FromIntervalEnd;
    if (s == "split-as-delay") return SplitReading::SplitAsDelay;
    return std::nullopt;
}

std::string to_string(SplitReading r)
{
    return r == SplitReading::FromIntervalEnd ? "from-interval-end" : "split-as-delay";
}

RunConfig parse_config(const json& doc)
{
    check_keys(doc, "", {"model", "params", "delay", "z0", "simulation", "search", "solver", "quadrature", "assembly",
                         "output_dir", "seed", "count"});
    RunConfig cfg;
    if (doc.contains("model")) {
        cfg.model = parse_model(doc["model"]);
        if (doc["model"].contains("preset")) cfg.model_name = doc["model"]["preset"].get<std::string>();
    }
    if (doc.contains("params")) {
        const auto& p = doc["params"];
        check_keys(p, "params", {"h", "mu", "k"});
        if (p.contains("h")) cfg.h = number(p["h"], "params.h");
        if (p.contains("mu")) cfg.mu = number(p["mu"], "params.mu");
        if (p.contains("k")) cfg.k = number(p["k"], "params.k");
        if (cfg.h && !(*cfg.h > 0)) throw ConfigError("params.h", "must be positive");
        if (cfg.mu && !(*cfg.mu >= 0 && *cfg.mu < 1)) throw ConfigError("params.mu", "must lie in [0, 1)");
        if (cfg.k && !(*cfg.k > 0)) throw ConfigError("params.k", "must be positive");
    }
    if (doc.contains("delay")) {
        const auto& d = doc["delay"];
        check_keys(d, "delay", {"h0", "amplitude", "frequency"});
        DelayFunction f;
        if (!d.contains("h0")) throw ConfigError("delay.h0", "required");
        f.h0 = number(d["h0"], "delay.h0");
        if (d.contains("amplitude")) f.amplitude = number(d["amplitude"], "delay.amplitude");
        if (d.contains("frequency")) f.frequency = number(d["frequency"], "delay.frequency");
        if (f.h0 < std::abs(f.amplitude)) throw ConfigError("delay", "h0 must be at least |amplitude|");
        cfg.delay = f;
    }
    if (doc.contains("z0")) cfg.z0 = numbers(doc["z0"], "z0");
    if (doc.contains("simulation")) {
        const auto& s = doc["simulation"];
        check_keys(s, "simulation", {"t_end", "dt"});
        if (s.contains("t_end")) cfg.t_end = number(s["t_end"], "simulation.t_end");
        if (s.contains("dt")) cfg.dt = number(s["dt"], "simulation.dt");
        if (!(cfg.t_end > 0)) throw ConfigError("simulation.t_end", "must be positive");
        if (!(cfg.dt > 0)) throw ConfigError("simulation.dt", "must be positive");
    }
    if (doc.contains("search")) {
        const auto& s = doc["search"];
        check_keys(s, "search", {"mode", "lo", "hi", "tolerance", "max_iters"});
        if (s.contains("mode")) {
            if (!s["mode"].is_string()) throw ConfigError("search.mode", "expected a string");
            const auto mode = s["mode"].get<std::string>();
            if (mode == "max-delay")
                cfg.search_mode = SearchMode::MaxDelay;
            else if (mode == "max-rate")
                cfg.search_mode = SearchMode::MaxRate;
            else
                throw ConfigError("search.mode", "expected max-delay or max-rate");
        }
        if (s.contains("lo")) cfg.search_lo = number(s["lo"], "search.lo");
        if (s.contains("hi")) cfg.search_hi = number(s["hi"], "search.hi");
        if (s.contains("tolerance")) cfg.search_tolerance = number(s["tolerance"], "search.tolerance");
        if (s.contains("max_iters")) {
            if (!s["max_iters"].is_number_integer()) throw ConfigError("search.max_iters", "expected an integer");
            cfg.search_max_iters = s["max_iters"].get<int>();
        }
        if (!(cfg.search_tolerance > 0)) throw ConfigError("search.tolerance", "must be positive");
        if (cfg.search_lo && cfg.search_hi && !(*cfg.search_lo < *cfg.search_hi))
            throw ConfigError("search", "lo must be below hi");
    }
    if (doc.contains("solver")) {
        const auto& s = doc["solver"];
        check_keys(s, "solver", {"tol", "max_iters"});
        if (s.contains("tol")) cfg.solver.tol = number(s["tol"], "solver.tol");
        if (s.contains("max_iters")) {
            if (!s["max_iters"].is_number_integer()) throw ConfigError("solver.max_iters", "expected an integer");
            cfg.solver.max_iters = s["max_iters"].get<int>();
        }
        if (!(cfg.solver.tol > 0)) throw ConfigError("solver.tol", "must be positive");
    }
    if (doc.contains("quadrature")) {
        const auto& q = doc["quadrature"];
        check_keys(q, "quadrature", {"tol", "root_tol"});
        if (q.contains("tol")) cfg.quad_tol = number(q["tol"], "quadrature.tol");
        if (q.contains("root_tol")) cfg.root_tol = number(q["root_tol"], "quadrature.root_tol");
    }
    if (doc.contains("assembly")) {
        const auto& a = doc["assembly"];
        check_keys(a, "assembly", {"split_reading", "scale_mean_term_by_h"});
        if (a.contains("split_reading")) {
            const auto r = a["split_reading"].is_string() ? parse_split_reading(a["split_reading"].get<std::string>())
                                                          : std::nullopt;
            if (!r) throw ConfigError("assembly.split_reading", "expected from-interval-end or split-as-delay");
            cfg.assembly.split_reading = *r;
        }
        if (a.contains("scale_mean_term_by_h")) {
            if (!a["scale_mean_term_by_h"].is_boolean())
                throw ConfigError("assembly.scale_mean_term_by_h", "expected a boolean");
            cfg.assembly.scale_mean_term_by_h = a["scale_mean_term_by_h"].get<bool>();
        }
    }
    if (doc.contains("output_dir")) {
        if (!doc["output_dir"].is_string()) throw ConfigError("output_dir", "expected a string");
        cfg.output_dir = doc["output_dir"].get<std::string>();
    }
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("count")) {
        if (!doc["count"].is_number_integer() || doc["count"].get<long>() < 1)
            throw ConfigError("count", "expected a positive integer");
        cfg.count = doc["count"].get<int>();
    }
    if (cfg.model && cfg.z0 && cfg.z0->size() != cfg.model->dimension())
        throw ConfigError("z0", "length differs from the model dimension");
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(doc);
}

void apply_preset(RunConfig& cfg, const std::string& name)
{
    auto m = preset_model(name);
    if (!m) throw ConfigError("preset", "unknown preset '" + name + "'");
    cfg.model = *m;
    cfg.model_name = name;
    // default trajectory setups for the benchmark networks
    if (name == "example1") {
        if (!cfg.delay) cfg.delay = DelayFunction{1.0, 0.0, 0.0};
        if (!cfg.z0) cfg.z0 = Eigen::Vector2d(-1.0, 1.0);
    } else if (name == "example2") {
        if (!cfg.delay) cfg.delay = DelayFunction{2.8674, 0.8, 1.0};
        if (!cfg.z0) cfg.z0 = Eigen::Vector4d(-1.0, -0.5, 0.5, 1.0);
    } else if (name == "example3") {
        if (!cfg.delay) cfg.delay = DelayFunction{6.3039, 0.77, 1.0};
        if (!cfg.z0) cfg.z0 = Eigen::Vector2d(-1.0, 1.0);
    }
}

const NetworkModel& require_model(const RunConfig& cfg)
{
    if (!cfg.model) throw ConfigError("model", "required (use --preset or a config with a model)");
    return *cfg.model;
}

AnalysisParams require_params(const RunConfig& cfg)
{
    if (!cfg.h) throw ConfigError("params.h", "required");
    if (!cfg.mu) throw ConfigError("params.mu", "required");
    if (!cfg.k) throw ConfigError("params.k", "required");
    AnalysisParams p{*cfg.h, *cfg.mu, *cfg.k};
    try {
        p.validate(require_model(cfg));
    } catch (const Error& e) {
        throw ConfigError("params", e.what());
    }
    return p;
}

json model_to_json(const NetworkModel& m)
{
    const Eigen::Index n = m.dimension();
    auto flat = [n](const Eigen::MatrixXd& x) {
        std::vector<double> v;
        for (Eigen::Index r = 0; r < n; ++r)
            for (Eigen::Index c = 0; c < n; ++c) v.push_back(x(r, c));
        return v;
    };
    return json{{"n", n},
                {"A", flat(m.A)},
                {"B", flat(m.B)},
                {"C", flat(m.C)},
                {"L", std::vector<double>(m.L.data(), m.L.data() + n)}};
}

} // namespace delaycert::cli
