#pragma once

// File formats, report serialization, and the end-to-end pipeline assembly
// used by the command-line tool and the verification harness.
//
// Serialization conventions (also the determinism contract): rational numbers
// are "p/q" strings (plain "p" when q = 1), reals are shortest round-trip
// decimals, non-finite reals appear as the strings "inf"/"-inf"/"nan", and
// object keys keep insertion order, so identical inputs produce byte-identical
// artifacts.

#include "toricflat/geometry.hpp"
#include "toricflat/harmonic.hpp"
#include "toricflat/polytope.hpp"
#include "toricflat/profile.hpp"
#include "toricflat/solver.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace toricflat {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::ordered_json;

// Shortest decimal that round-trips to the same double; "inf"/"-inf"/"nan"
// for non-finite values.
std::string format_double(double v);
// Finite doubles serialize as JSON numbers, non-finite ones as strings.
Json json_real(double v);
double parse_double(const std::string& text);
std::vector<double> parse_double_list(const std::string& csv);

// ---------------------------------------------------------------------------
// Polytope files:
//   { "facets": [ { "normal": [1, 0], "offset": "0" }, ... ], "removed": 2 }
// Offsets are integers or "p/q" strings; "removed" (optional) is the 0-based
// index into "facets" of the removed edge.
// ---------------------------------------------------------------------------
struct PolytopeInput {
  DelzantPolygon polygon;
  std::optional<int> removed;
};

PolytopeInput polytope_from_json(const Json& j);
Json polytope_to_json(const DelzantPolygon& polygon, std::optional<int> removed);
PolytopeInput load_polytope_file(const std::string& path);

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------
Json validation_to_json(const ValidationReport& report);
Json extremal_to_json(const AffineFunction& affine, const ExtremalData& data);
Json profile_to_json(const BoundaryProfile& profile);
Json admissibility_to_json(const AdmissibilityReport& report);
Json solve_to_json(const NodeSolveResult& result);
Json volumes_to_json(const VolumeReport& report);
Json calibration_to_json(const Calibration& cal);

// ---------------------------------------------------------------------------
// Tolerance / grid configuration (optional JSON file, flat keys)
// ---------------------------------------------------------------------------
struct Config {
  double harmonic_residual = 1e-12;  // relative
  double fd_agreement = 1e-6;        // relative
  double cr_residual = 1e-10;        // absolute
  double solver_tol = 1e-10;
  GridSpec grid;
};

Config config_from_json(const Json& j);
Config load_config_file(const std::string& path);

// Grid override grammar: "z=<lo>:<hi>:<count>,rho=[log:]<lo>:<hi>:<count>"
// (either axis may be omitted to keep the base value).
GridSpec parse_grid_spec(const std::string& text, GridSpec base);

// ---------------------------------------------------------------------------
// CSV artifacts (row order: rho outer, z inner)
// ---------------------------------------------------------------------------
void write_harmonic_csv(std::ostream& os, const std::vector<GridSample>& samples);
void write_metrics_csv(std::ostream& os, const std::vector<MetricsSample>& samples);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// ---------------------------------------------------------------------------
// Pipeline assembly (the verification harness behind `verify`)
// ---------------------------------------------------------------------------
struct ResidualSummary {
  double max_harmonic_residual = 0;  // relative, over the config grid
  double max_cr_residual = 0;        // absolute, safe-point probe
  double min_scal = 0;
  double min_V = 0;
  std::vector<double> boundary_limit_trend;  // max_z |U/log rho^2 - f|, rho = 10^-k, k = 2..8
  bool boundary_trend_decreasing = false;
};

struct PipelineReport {
  ValidationReport validation;
  AffineFunction affine;
  ExtremalData extremal;
  BoundaryProfile profile;
  AdmissibilityReport admissibility;
  VanishingCase vanishing;
  FamilyLabel family = FamilyLabel::Unclassified;
  std::optional<NodeSolveResult> solve;
  std::optional<ResidualSummary> residuals;
  bool pass = false;
  std::vector<std::string> failures;
};

struct PipelineOptions {
  double A = 0;                              // required by the profile stage
  std::optional<std::vector<double>> nodes;  // explicit node positions
  bool solve = false;                        // derive nodes from edge lengths
};

// Runs validation -> extremal -> normalization -> profile -> classification
// -> (optional) node solve -> residual sweeps.  Never throws for analysis
// failures; they land in `failures` and clear `pass`.
PipelineReport run_pipeline(const PuncturedPolytope& pp, const PipelineOptions& options,
                            const Config& config);

Json pipeline_to_json(const PipelineReport& report);

// Max conjugacy defect max(|H_z - rho U_rho|, |H_rho + rho U_z|) over a fixed
// lattice of probe points kept away from the axis and the kinks, with H_z and
// H_rho from fourth-order central differences of the closed-form H.
double max_cr_residual(const BoundaryProfile& profile);

}  // namespace toricflat
