#pragma once

// JSON run configuration for the command-line front end.

#include "delaycert/dde.hpp"
#include "delaycert/search.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace delaycert::cli {

/// Schema problem; `path` is the offending field, e.g. "model.A[3]".
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& msg)
        : std::runtime_error(path + ": " + msg), path_(path) {}
    [[nodiscard]] const std::string& path() const { return path_; }

private:
    std::string path_;
};

struct RunConfig {
    std::string model_name = "custom";
    std::optional<NetworkModel> model;
    std::optional<double> h, mu, k;
    std::optional<DelayFunction> delay;
    std::optional<Eigen::VectorXd> z0;
    double t_end = 30.0;
    double dt = 1e-3;
    std::optional<SearchMode> search_mode;
    std::optional<double> search_lo, search_hi;
    double search_tolerance = 1e-4;
    int search_max_iters = 100;
    SolverSettings solver;
    double quad_tol = kDefaultQuadTol;
    double root_tol = kDefaultRootTol;
    AssemblyOptions assembly;
    std::string output_dir = ".";
    std::uint64_t seed = 7;
    int count = 1000;
};

/// Validates every field before anything is computed.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

/// Replaces the model with a named preset and fills preset defaults for the
/// delay function and initial state when those are unset.
void apply_preset(RunConfig& cfg, const std::string& name);

std::optional<SplitReading> parse_split_reading(const std::string& s);
std::string to_string(SplitReading r);

const NetworkModel& require_model(const RunConfig& cfg);
AnalysisParams require_params(const RunConfig& cfg);

nlohmann::json model_to_json(const NetworkModel& m);

} // namespace delaycert::cli
