// Command-line front end: validate / extremal / profile / classify / solve /
// sample / verify / volumes.  Reports go to stdout as JSON (deterministic:
// ordered keys, shortest round-trip numbers); CSV grids go to --output.
// Exit codes: 0 success, 1 invariant failure, 2 input/parse error.

#include "toricflat/fixtures.hpp"
#include "toricflat/geometry.hpp"
#include "toricflat/io.hpp"
#include "toricflat/solver.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace tf = toricflat;

namespace {

struct CommonArgs {
  std::string input;
  std::string fixture;
  std::string nodes_csv;
  std::string grid;
  std::string config_path;
  std::string output_dir = ".";
  double A = 0;
  bool a_given = false;
  bool do_solve = false;
};

void emit(const tf::Json& j) { std::cout << j.dump(2) << '\n'; }

tf::PolytopeInput acquire_polytope(const CommonArgs& args) {
  if (args.input.empty() == args.fixture.empty()) {
    throw tf::IoError("pass exactly one of --input or --fixture");
  }
  if (!args.fixture.empty()) {
    const tf::PuncturedPolytope pp = tf::load_fixture(args.fixture);
    return tf::PolytopeInput{pp.polygon(), pp.removed_input_index()};
  }
  return tf::load_polytope_file(args.input);
}

tf::PuncturedPolytope acquire_punctured(const CommonArgs& args) {
  const tf::PolytopeInput in = acquire_polytope(args);
  if (!in.removed) {
    throw tf::IoError("this command needs a removed edge (\"removed\" in the file)");
  }
  return tf::PuncturedPolytope(in.polygon, *in.removed);
}

tf::Config acquire_config(const CommonArgs& args) {
  tf::Config config;
  if (!args.config_path.empty()) config = tf::load_config_file(args.config_path);
  if (!args.grid.empty()) config.grid = tf::parse_grid_spec(args.grid, config.grid);
  return config;
}

double require_A(const CommonArgs& args) {
  if (!args.a_given) throw tf::IoError("--A is required for this command");
  if (!(args.A > 0)) throw tf::IoError("--A must be positive");
  return args.A;
}

struct NormalizedData {
  tf::PuncturedPolytope npp;
  tf::AffineFunction affine;
  tf::ExtremalData extremal;
};

// Validation gate + extremal normalization shared by the analysis commands.
// Throws PolytopeError (exit 1) when the polygon is not Delzant.
NormalizedData normalized_or_throw(const tf::PuncturedPolytope& pp) {
  const tf::ValidationReport validation = tf::validate(pp.polygon());
  if (!validation.pass) {
    throw tf::PolytopeError("polytope validation failed: " + validation.summary);
  }
  NormalizedData data;
  data.affine = tf::extremal_affine(pp);
  auto [npp, extremal] = tf::normalize(pp, data.affine);
  data.npp = std::move(npp);
  data.extremal = extremal;
  return data;
}

struct ResolvedNodes {
  std::vector<double> nodes;
  std::optional<tf::NodeSolveResult> solve;
};

// --nodes wins; --solve derives nodes from compact-edge lengths; d = 2 needs
// neither.  Node-count/order problems in user input are input errors (exit 2).
ResolvedNodes resolve_nodes(const CommonArgs& args, const NormalizedData& data,
                            double A, const tf::Config& config) {
  const int d = data.npp.surviving_count();
  if (!args.nodes_csv.empty() && args.do_solve) {
    throw tf::IoError("pass --nodes or --solve, not both");
  }
  ResolvedNodes out;
  if (!args.nodes_csv.empty()) {
    out.nodes = tf::parse_double_list(args.nodes_csv);
    if (static_cast<int>(out.nodes.size()) != d - 1) {
      throw tf::IoError("--nodes needs exactly " + std::to_string(d - 1) + " values");
    }
    for (std::size_t i = 1; i < out.nodes.size(); ++i) {
      if (!(out.nodes[i] > out.nodes[i - 1])) {
        throw tf::IoError("--nodes must strictly increase");
      }
    }
    return out;
  }
  if (args.do_solve) {
    tf::NodeSolveProblem problem;
    problem.pp = data.npp;
    problem.eta = data.extremal.eta;
    problem.A = A;
    for (int i = 2; i <= d - 1; ++i) {
      const auto ends = data.npp.edge_endpoints(i);
      problem.targets.push_back(std::hypot(tf::to_double(ends.second.x - ends.first.x),
                                           tf::to_double(ends.second.y - ends.first.y)));
    }
    out.solve = tf::solve_nodes(problem, config.solver_tol);
    out.nodes = out.solve->nodes;
    return out;
  }
  if (d == 2) {
    out.nodes = {0.0};
    return out;
  }
  throw tf::IoError("node positions required: pass --nodes or --solve");
}

tf::BoundaryProfile build_profile_from(const NormalizedData& data, double A,
                                       const std::vector<double>& nodes) {
  const tf::ProfileCoefficients coeffs =
      tf::profile_coefficients(data.extremal.eta, data.npp);
  std::vector<double> a;
  a.reserve(coeffs.a.size());
  for (const tf::Rational& c : coeffs.a) a.push_back(tf::to_double(c));
  return tf::build_profile(A, tf::to_double(coeffs.B), a, nodes);
}

int cmd_validate(const CommonArgs& args) {
  const tf::PolytopeInput in = acquire_polytope(args);
  const tf::ValidationReport report = tf::validate(in.polygon);
  emit(tf::validation_to_json(report));
  return report.pass ? 0 : 1;
}

int cmd_extremal(const CommonArgs& args) {
  const tf::PolytopeInput in = acquire_polytope(args);
  if (in.removed) {
    const tf::PuncturedPolytope pp(in.polygon, *in.removed);
    const NormalizedData data = normalized_or_throw(pp);
    emit(tf::extremal_to_json(data.affine, data.extremal));
    return 0;
  }
  const tf::ValidationReport validation = tf::validate(in.polygon);
  if (!validation.pass) {
    throw tf::PolytopeError("polytope validation failed: " + validation.summary);
  }
  const tf::AffineFunction affine = tf::extremal_affine(in.polygon);
  tf::ExtremalData data;
  data.eta = tf::Vec2R{affine.a1, affine.a2};
  data.a0_residual = affine.a0;
  emit(tf::extremal_to_json(affine, data));
  return 0;
}

int cmd_profile(const CommonArgs& args) {
  const double A = require_A(args);
  const tf::Config config = acquire_config(args);
  const NormalizedData data = normalized_or_throw(acquire_punctured(args));
  if (data.extremal.scalar_flat) {
    throw tf::PolytopeError("scalar-flat data: no boundary profile");
  }
  const ResolvedNodes resolved = resolve_nodes(args, data, A, config);
  const tf::BoundaryProfile profile = build_profile_from(data, A, resolved.nodes);

  tf::Json j = tf::profile_to_json(profile);
  const tf::ProfileCoefficients coeffs =
      tf::profile_coefficients(data.extremal.eta, data.npp);
  tf::Json cj = tf::Json::array();
  for (const tf::Rational& c : coeffs.a) cj.push_back(tf::rational_to_string(c));
  j["coefficients"] = std::move(cj);
  j["drift"] = tf::rational_to_string(coeffs.B);
  j["admissibility"] = tf::admissibility_to_json(tf::admissibility(profile));
  j["vanishing_case"] =
      tf::to_string(tf::scal_vanishing_case(data.extremal.eta, data.npp));
  if (resolved.solve) j["solve"] = tf::solve_to_json(*resolved.solve);
  emit(j);
  return (resolved.solve && !resolved.solve->converged) ? 1 : 0;
}

int cmd_classify(const CommonArgs& args) {
  const NormalizedData data = normalized_or_throw(acquire_punctured(args));
  tf::Json j = tf::Json::object();
  j["family"] = tf::to_string(tf::classify_family(data.npp));
  j["surviving_edges"] = data.npp.surviving_count();
  if (!data.extremal.scalar_flat) {
    j["vanishing_case"] =
        tf::to_string(tf::scal_vanishing_case(data.extremal.eta, data.npp));
  }
  emit(j);
  return 0;
}

int cmd_solve(const CommonArgs& args) {
  const double A = require_A(args);
  const tf::Config config = acquire_config(args);
  const NormalizedData data = normalized_or_throw(acquire_punctured(args));
  if (data.extremal.scalar_flat) {
    throw tf::PolytopeError("scalar-flat data: no node solve");
  }
  CommonArgs solve_args = args;
  solve_args.do_solve = true;
  solve_args.nodes_csv.clear();
  const ResolvedNodes resolved = resolve_nodes(solve_args, data, A, config);
  emit(tf::solve_to_json(*resolved.solve));
  return resolved.solve->converged ? 0 : 1;
}

int cmd_sample(const CommonArgs& args) {
  const double A = require_A(args);
  const tf::Config config = acquire_config(args);
  const NormalizedData data = normalized_or_throw(acquire_punctured(args));
  if (data.extremal.scalar_flat) {
    throw tf::PolytopeError("scalar-flat data: nothing to sample");
  }
  const ResolvedNodes resolved = resolve_nodes(args, data, A, config);
  const tf::BoundaryProfile profile = build_profile_from(data, A, resolved.nodes);

  const std::vector<tf::GridSample> harmonic = tf::sample_grid(profile, config.grid);
  const tf::Calibration cal =
      tf::calibrate(profile, data.npp, data.extremal.eta);
  const std::vector<tf::MetricsSample> metrics =
      tf::sample_metrics(profile, config.grid, &cal);

  const std::filesystem::path dir(args.output_dir);
  std::filesystem::create_directories(dir);
  const std::filesystem::path harmonic_path = dir / "harmonic.csv";
  const std::filesystem::path metrics_path = dir / "metrics.csv";

  std::ostringstream hcsv;
  tf::write_harmonic_csv(hcsv, harmonic);
  tf::write_text_file(harmonic_path.string(), hcsv.str());
  std::ostringstream mcsv;
  tf::write_metrics_csv(mcsv, metrics);
  tf::write_text_file(metrics_path.string(), mcsv.str());

  tf::Json j = tf::Json::object();
  j["harmonic_csv"] = harmonic_path.string();
  j["metrics_csv"] = metrics_path.string();
  j["rows"] = harmonic.size();
  j["calibration"] = tf::calibration_to_json(cal);
  if (resolved.solve) j["solve"] = tf::solve_to_json(*resolved.solve);
  emit(j);
  return (resolved.solve && !resolved.solve->converged) ? 1 : 0;
}

int cmd_verify(const CommonArgs& args) {
  const double A = require_A(args);
  const tf::Config config = acquire_config(args);
  const tf::PuncturedPolytope pp = acquire_punctured(args);

  tf::PipelineOptions options;
  options.A = A;
  options.solve = args.do_solve;
  if (!args.nodes_csv.empty()) {
    if (args.do_solve) throw tf::IoError("pass --nodes or --solve, not both");
    options.nodes = tf::parse_double_list(args.nodes_csv);
  }
  const tf::PipelineReport report = tf::run_pipeline(pp, options, config);
  emit(tf::pipeline_to_json(report));
  return report.pass ? 0 : 1;
}

int cmd_volumes(const CommonArgs& args) {
  const double A = require_A(args);
  const tf::Config config = acquire_config(args);
  const NormalizedData data = normalized_or_throw(acquire_punctured(args));
  if (data.extremal.scalar_flat) {
    throw tf::PolytopeError("scalar-flat data: no divisor volumes");
  }
  const ResolvedNodes resolved = resolve_nodes(args, data, A, config);
  const tf::BoundaryProfile profile = build_profile_from(data, A, resolved.nodes);
  const tf::VolumeReport report =
      tf::divisor_volumes(profile, data.npp, data.extremal.eta);
  tf::Json j = tf::volumes_to_json(report);
  if (resolved.solve) j["solve"] = tf::solve_to_json(*resolved.solve);
  emit(j);
  return (resolved.solve && !resolved.solve->converged) ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Toric half-plane pipeline: Delzant polygons, boundary profiles, "
               "axi-symmetric harmonic data, divisor volumes, node solves."};
  app.require_subcommand(1);

  CommonArgs args;
  const auto add_common = [&](CLI::App* sc, bool with_solve) {
    sc->add_option("--input", args.input, "polytope JSON file");
    sc->add_option("--fixture", args.fixture, "bundled fixture name");
    sc->add_option("--A", args.A, "profile constant A > 0")
        ->each([&](const std::string&) { args.a_given = true; });
    sc->add_option("--nodes", args.nodes_csv, "comma-separated kink positions");
    sc->add_option("--grid", args.grid, "grid spec, e.g. z=-5:5:101,rho=0.01:10:101");
    sc->add_option("--config", args.config_path, "tolerance/grid config JSON");
    sc->add_option("--output", args.output_dir, "output directory for CSV artifacts");
    if (with_solve) {
      sc->add_flag("--solve", args.do_solve, "derive nodes from compact-edge lengths");
    }
    return sc;
  };

  CLI::App* validate = add_common(app.add_subcommand("validate", "check the polygon"), false);
  CLI::App* extremal =
      add_common(app.add_subcommand("extremal", "extremal affine data"), false);
  CLI::App* profile =
      add_common(app.add_subcommand("profile", "boundary profile and audits"), true);
  CLI::App* classify =
      add_common(app.add_subcommand("classify", "family classification"), false);
  CLI::App* solve = add_common(app.add_subcommand("solve", "place the nodes"), false);
  CLI::App* sample =
      add_common(app.add_subcommand("sample", "grid CSVs of U and metrics"), true);
  CLI::App* verify =
      add_common(app.add_subcommand("verify", "full pipeline with invariant gates"), true);
  CLI::App* volumes =
      add_common(app.add_subcommand("volumes", "per-edge divisor volumes"), true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
      return app.exit(e);
    }
    app.exit(e);
    return 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(args);
    if (extremal->parsed()) return cmd_extremal(args);
    if (profile->parsed()) return cmd_profile(args);
    if (classify->parsed()) return cmd_classify(args);
    if (solve->parsed()) return cmd_solve(args);
    if (sample->parsed()) return cmd_sample(args);
    if (verify->parsed()) return cmd_verify(args);
    if (volumes->parsed()) return cmd_volumes(args);
  } catch (const tf::IoError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
