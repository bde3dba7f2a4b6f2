#pragma once

// Bisection for the largest certified delay bound or decay rate.

#include "delaycert/lmi.hpp"
#include "delaycert/model.hpp"
#include "delaycert/sdp.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace delaycert {

enum class SearchMode { MaxDelay, MaxRate };

std::string_view to_string(SearchMode mode);

struct SearchSpec {
    SearchMode mode = SearchMode::MaxDelay;
    double lo = 0.1;
    double hi = 12.0;
    double tolerance = 1e-4;
    int max_iters = 100;
    int max_widenings = 4;
    bool post_scan = true;
    SolverSettings solver;
    AssemblyOptions assembly;
};

/// lo = 0.1, hi = 12 for delays; lo = 1e-6, hi = 0.999 min c_i for rates.
SearchSpec default_search_spec(SearchMode mode, const NetworkModel& model);

struct Probe {
    double param = 0.0;
    FeasibilityStatus status = FeasibilityStatus::NumericalFailure;
    double margin = 0.0;
    bool retry = false; ///< second attempt after a solver failure
};

struct SearchResult {
    SearchMode mode = SearchMode::MaxDelay;
    double optimum = 0.0; ///< last certified-feasible parameter
    double lo = 0.0, hi = 0.0;
    int iterations = 0;
    std::vector<Probe> probes;
    int indeterminate = 0;
    bool low_confidence = false;
    std::vector<Probe> post_scan; ///< points in (optimum, optimum + 0.5]
    bool post_scan_clean = true;
    std::vector<std::string> warnings;
};

/// One feasibility decision at a parameter point.
FeasibilityReport probe_point(const NetworkModel& model, const AnalysisParams& params,
                              const SolverSettings& solver = {}, const AssemblyOptions& assembly = {});

SearchResult max_delay(const NetworkModel& model, double mu, double k, const SearchSpec& spec);
SearchResult max_rate(const NetworkModel& model, double h, double mu, const SearchSpec& spec);

struct ReferenceCell {
    double mu;
    double value;
};

struct TableSetup {
    int example = 0;
    SearchMode mode = SearchMode::MaxDelay;
    double fixed = 0.0; ///< h for rate searches, k for delay searches
    std::vector<ReferenceCell> cells;
};

/// Setups for the three benchmark tables.
TableSetup table_setup(int example_id);

struct TableRow {
    int example = 0;
    double mu = 0.0;
    double fixed = 0.0;
    double bound = 0.0;
    double reference = 0.0;
    double deviation = 0.0; ///< (bound - reference) / reference
    int iterations = 0;
    std::string confidence; ///< "high", "low" or "error"
    std::optional<SearchResult> search;
    std::string error;
    // secondary check at fixed fractions of the reference value
    std::optional<FeasibilityReport> at_lower; ///< 0.97 reference
    std::optional<FeasibilityReport> at_upper; ///< 1.05 reference
};

struct ReproduceOptions {
    int jobs = 1;
    bool check_fractions = true;
    SearchSpec overrides; ///< tolerance, solver and assembly are taken from here
};

std::vector<TableRow> reproduce_table(int example_id, const ReproduceOptions& options = {});

void write_table_csv(std::ostream& out, const std::vector<TableRow>& rows);

} // namespace delaycert
