#pragma once

#include <optional>
#include <string>
#include <vector>

#include "parobst/curve.hpp"
#include "parobst/decomposition.hpp"
#include "parobst/grid.hpp"
#include "parobst/obstacle.hpp"
#include "parobst/weiss.hpp"

namespace parobst {

inline constexpr const char* kArtifactVersion = "parobst 1.0.0";

/// Raised by load_scenario / parse_scenario; the message names the line or field.
class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GridSpec {
    int n = 1;
    double R = 1.25;
    double h = 1.0 / 64;
    double T = 1.25;
    double k = 0;   // 0: 4 h^2

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct ProblemSpec {
    std::string mode = "solve";   // solve: obstacle solve with data from the profile; exact: use the profile itself
    std::string exact = "halfspace";
    std::string params;
    double perturbation = 0;      // boundary perturbation eps max(0, x1)^3
    double domain_radius = 1;

    friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

struct DiagnosticPlan {
    std::vector<Point> centers;        // empty: free boundary node nearest the origin
    std::vector<double> radii;         // lambda, S, rho, M, blow-up, MD, key inequality
    std::vector<double> weiss_radii;
    WeissQuadrature quad;
    std::vector<double> sigma{0.1};    // one value, or one per radius
    double bad_scale_threshold = 1.0;     // radii with S above it form the bad-scale set
    int directions = 0;                // 0: default count
    int telescope_levels = 2;

    friend bool operator==(const DiagnosticPlan&, const DiagnosticPlan&) = default;
};

struct Scenario {
    std::string name = "scenario";
    GridSpec grid;
    ProblemSpec problem;
    ObstacleParams solver;
    DiagnosticPlan diag;
    std::string output_dir = "out";

    SpaceTimeGrid make() const;
    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Flat `key = value` lines with dotted keys; `#` starts a comment.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
/// Writes every key; parse_scenario(serialize(s)) == s.
std::string serialize(const Scenario& s);

struct SolverRecord {
    std::string mode;
    bool converged = false;
    int iterations = 0;
    int max_level_iterations = 0;
    int damped_levels = 0;
    int unconverged_levels = 0;
    double residual = 0;
    double tol_zero = 0;
    std::size_t coincidence_nodes = 0;
    std::size_t free_boundary_nodes = 0;
};

struct KeyRow {
    double r = 0;
    KeyInequalityReport key;
};

struct MdRow {
    double r = 0;
    double sigma = 0;
    MinimalDiameter md;
};

struct TelescopeRow {
    int level = 0;
    double residual = 0;
    double projection_sup = 0;
    double caloric_defect = 0;
};

struct PointReport {
    Point center;
    std::vector<DiagnosticCurve> curves;   // lambda, S, rho, M, W, blowup
    std::vector<bool> decay_flags;
    std::vector<double> bad_scales;
    bool weiss_monotone = true;
    double weiss_worst_drop = 0;
    std::optional<EnergyClass> energy;
    std::vector<MdRow> md;
    std::vector<KeyRow> key;
    double telescope_radius = 0;
    std::vector<TelescopeRow> telescope;
};

struct MeasuredConstant {
    std::string name;
    double value = 0;
    std::string grid;   // grid spec it was measured on
};

struct RunReport {
    std::string version = kArtifactVersion;
    std::string grid_hash;
    std::string grid;
    Scenario scenario;
    SolverRecord solver;
    std::vector<PointReport> points;
    std::vector<MeasuredConstant> constants;
    std::vector<std::string> failures;
    std::string timestamp;   // only non-deterministic field
};

struct RunOptions {
    int threads = 1;
    bool timestamp = true;
};

/// Solve (or sample) and run every diagnostic of the plan. Module errors are
/// collected in `failures` with their context; the report is always returned.
RunReport run(const Scenario& s, const RunOptions& opt = {});

/// Full report as JSON (shortest round-trip numbers). The timestamp is left out when
/// `with_timestamp` is false.
std::string report_json(const RunReport& r, bool with_timestamp = true);

/// Every curve of the report, named p<i>_<curve>.
std::vector<DiagnosticCurve> report_curves(const RunReport& r);

struct EmitFormats {
    bool json = true, csv = true, svg = true;
};
/// "json,csv,svg" subsets; unknown names throw ScenarioError.
EmitFormats parse_formats(const std::string& list);

/// Writes report.json, <curve>.csv and <curve>.svg into dir (created when
/// missing). Returns the written paths. IO errors throw std::runtime_error.
std::vector<std::string> emit(const RunReport& r, const std::string& dir, const EmitFormats& formats = {});

std::string curve_csv(const DiagnosticCurve& c);
std::string curve_svg(const DiagnosticCurve& c);

/// FNV-1a of the canonical grid spec string.
std::string grid_hash(const GridSpec& g);

}  // namespace parobst
