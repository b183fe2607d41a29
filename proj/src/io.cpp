#include "toricflat/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace toricflat {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string::size_type start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

Rational rational_from_json(const Json& j, const std::string& where) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_string()) {
    try {
      return parse_rational(j.get<std::string>());
    } catch (const std::exception& e) {
      throw IoError(where + ": " + e.what());
    }
  }
  throw IoError(where + ": expected an integer or a \"p/q\" string");
}

Json rational_json(const Rational& r) { return Json(rational_to_string(r)); }

int int_from_json(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw IoError(where + ": expected an integer");
  return j.get<int>();
}

std::int64_t int64_from_json(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw IoError(where + ": expected an integer");
  return j.get<std::int64_t>();
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 40> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

Json json_real(double v) {
  if (std::isfinite(v)) return Json(v);
  return Json(format_double(v));
}

double parse_double(const std::string& text) {
  const std::string t = trim(text);
  double value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
    throw IoError("not a real number: '" + text + "'");
  }
  return value;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> values;
  for (const std::string& part : split(csv, ',')) values.push_back(parse_double(part));
  return values;
}

PolytopeInput polytope_from_json(const Json& j) {
  if (!j.is_object()) throw IoError("polytope: expected a JSON object");
  if (!j.contains("facets") || !j["facets"].is_array()) {
    throw IoError("polytope: missing \"facets\" array");
  }
  std::vector<Facet> facets;
  int index = 0;
  for (const Json& fj : j["facets"]) {
    const std::string where = "facets[" + std::to_string(index) + "]";
    if (!fj.is_object()) throw IoError(where + ": expected an object");
    if (!fj.contains("normal") || !fj["normal"].is_array() || fj["normal"].size() != 2) {
      throw IoError(where + ": \"normal\" must be a two-entry integer array");
    }
    Facet f;
    f.normal.u1 = int64_from_json(fj["normal"][0], where + ".normal[0]");
    f.normal.u2 = int64_from_json(fj["normal"][1], where + ".normal[1]");
    if (!fj.contains("offset")) throw IoError(where + ": missing \"offset\"");
    f.offset = rational_from_json(fj["offset"], where + ".offset");
    for (const auto& [key, value] : fj.items()) {
      if (key != "normal" && key != "offset") {
        throw IoError(where + ": unknown key \"" + key + "\"");
      }
    }
    facets.push_back(std::move(f));
    ++index;
  }

  PolytopeInput input;
  try {
    input.polygon = DelzantPolygon(std::move(facets));
  } catch (const PolytopeError& e) {
    throw IoError(std::string("polytope: ") + e.what());
  }
  if (j.contains("removed")) {
    const int removed = int_from_json(j["removed"], "removed");
    if (removed < 0 || removed >= input.polygon.facet_count()) {
      throw IoError("removed: index out of range");
    }
    input.removed = removed;
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "facets" && key != "removed") {
      throw IoError("polytope: unknown key \"" + key + "\"");
    }
  }
  return input;
}

Json polytope_to_json(const DelzantPolygon& polygon, std::optional<int> removed) {
  Json j = Json::object();
  j["facets"] = Json::array();
  for (const Facet& f : polygon.facets()) {
    Json fj = Json::object();
    fj["normal"] = Json::array({f.normal.u1, f.normal.u2});
    fj["offset"] = rational_json(f.offset);
    j["facets"].push_back(std::move(fj));
  }
  if (removed) j["removed"] = *removed;
  return j;
}

PolytopeInput load_polytope_file(const std::string& path) {
  const std::string text = read_text_file(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  return polytope_from_json(j);
}

Json validation_to_json(const ValidationReport& report) {
  Json j = Json::object();
  j["pass"] = report.pass;
  j["bounded"] = report.bounded;
  j["facets"] = Json::array();
  for (const FacetCheck& c : report.facets) {
    Json cj = Json::object();
    cj["input_index"] = c.input_index;
    cj["primitive"] = c.primitive;
    cj["vertex_exists"] = c.vertex_exists;
    cj["unimodular_adjacent"] = c.unimodular_adjacent;
    if (c.vertex) {
      cj["vertex"] = Json::array({rational_json(c.vertex->x), rational_json(c.vertex->y)});
    }
    if (!c.note.empty()) cj["note"] = c.note;
    j["facets"].push_back(std::move(cj));
  }
  j["summary"] = report.summary;
  return j;
}

Json extremal_to_json(const AffineFunction& affine, const ExtremalData& data) {
  Json j = Json::object();
  j["affine"] = Json::array(
      {rational_json(affine.a0), rational_json(affine.a1), rational_json(affine.a2)});
  j["eta"] = Json::array({rational_json(data.eta.x), rational_json(data.eta.y)});
  j["normalized"] = data.normalized;
  j["scalar_flat"] = data.scalar_flat;
  j["translation"] =
      Json::array({rational_json(data.translation.x), rational_json(data.translation.y)});
  j["constant_term_after_normalization"] = rational_json(data.a0_residual);
  return j;
}

Json profile_to_json(const BoundaryProfile& profile) {
  Json j = Json::object();
  j["A"] = json_real(profile.A);
  j["B"] = json_real(profile.B);
  j["kinks"] = Json::array();
  for (const auto& k : profile.kinks) {
    Json kj = Json::object();
    kj["z"] = json_real(k.z);
    kj["a"] = json_real(k.a);
    j["kinks"].push_back(std::move(kj));
  }
  return j;
}

Json admissibility_to_json(const AdmissibilityReport& report) {
  Json j = Json::object();
  j["admissible"] = report.admissible;
  j["positive_A"] = report.positive_A;
  j["positive_coefficients"] = report.positive_coefficients;
  j["zero_drift"] = report.zero_drift;
  j["positive_profile"] = report.positive_profile;
  j["reasons"] = report.reasons;
  return j;
}

Json solve_to_json(const NodeSolveResult& result) {
  Json j = Json::object();
  j["converged"] = result.converged;
  j["iterations"] = result.iterations;
  j["nodes"] = Json::array();
  for (const double z : result.nodes) j["nodes"].push_back(json_real(z));
  j["residuals"] = Json::array();
  for (const double r : result.residuals) j["residuals"].push_back(json_real(r));
  j["equation_edges"] = result.equation_edges;
  j["notes"] = result.notes;
  return j;
}

Json volumes_to_json(const VolumeReport& report) {
  Json j = Json::object();
  j["edges"] = Json::array();
  for (const EdgeVolume& e : report.edges) {
    Json ej = Json::object();
    ej["edge"] = e.edge;
    ej["compact"] = e.compact;
    ej["formula_inapplicable"] = e.formula_inapplicable;
    ej["volume"] = json_real(e.volume);
    ej["euclidean_length"] = json_real(e.euclidean_length);
    ej["lattice_length"] = json_real(e.lattice_length);
    ej["consistency_residual"] = json_real(e.consistency_residual);
    if (!e.note.empty()) ej["note"] = e.note;
    j["edges"].push_back(std::move(ej));
  }
  return j;
}

Json calibration_to_json(const Calibration& cal) {
  Json j = Json::object();
  j["a"] = json_real(cal.a);
  j["q"] = json_real(cal.q);
  j["b"] = json_real(cal.b);
  j["residual"] = json_real(cal.residual);
  j["well_posed"] = cal.well_posed;
  return j;
}

Config config_from_json(const Json& j) {
  if (!j.is_object()) throw IoError("config: expected a JSON object");
  Config config;
  const auto number = [](const Json& v, const std::string& key) {
    if (!v.is_number()) throw IoError("config." + key + ": expected a number");
    return v.get<double>();
  };
  const auto count = [](const Json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<int>() < 2) {
      throw IoError("config." + key + ": expected an integer >= 2");
    }
    return v.get<int>();
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "harmonic_residual") {
      config.harmonic_residual = number(value, key);
    } else if (key == "fd_agreement") {
      config.fd_agreement = number(value, key);
    } else if (key == "cr_residual") {
      config.cr_residual = number(value, key);
    } else if (key == "solver_tol") {
      config.solver_tol = number(value, key);
    } else if (key == "grid_z_min") {
      config.grid.z_min = number(value, key);
    } else if (key == "grid_z_max") {
      config.grid.z_max = number(value, key);
    } else if (key == "grid_z_count") {
      config.grid.z_count = count(value, key);
    } else if (key == "grid_rho_min") {
      config.grid.rho_min = number(value, key);
    } else if (key == "grid_rho_max") {
      config.grid.rho_max = number(value, key);
    } else if (key == "grid_rho_count") {
      config.grid.rho_count = count(value, key);
    } else if (key == "grid_rho_log") {
      if (!value.is_boolean()) throw IoError("config.grid_rho_log: expected a boolean");
      config.grid.rho_log = value.get<bool>();
    } else {
      throw IoError("config: unknown key \"" + key + "\"");
    }
  }
  return config;
}

Config load_config_file(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  return config_from_json(j);
}

GridSpec parse_grid_spec(const std::string& text, GridSpec base) {
  for (const std::string& raw : split(text, ',')) {
    const std::string part = trim(raw);
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw IoError("grid: expected key=lo:hi:count, got '" + part + "'");
    const std::string key = trim(part.substr(0, eq));
    std::string rest = trim(part.substr(eq + 1));
    bool log_spacing = false;
    if (rest.rfind("log:", 0) == 0) {
      log_spacing = true;
      rest = rest.substr(4);
    }
    const std::vector<std::string> nums = split(rest, ':');
    if (nums.size() != 3) throw IoError("grid: expected lo:hi:count in '" + part + "'");
    const double lo = parse_double(nums[0]);
    const double hi = parse_double(nums[1]);
    const double count_d = parse_double(nums[2]);
    const int count = static_cast<int>(count_d);
    if (count < 2 || count != count_d) throw IoError("grid: count must be an integer >= 2");
    if (key == "z") {
      if (log_spacing) throw IoError("grid: log spacing applies to rho only");
      base.z_min = lo;
      base.z_max = hi;
      base.z_count = count;
    } else if (key == "rho") {
      base.rho_min = lo;
      base.rho_max = hi;
      base.rho_count = count;
      base.rho_log = log_spacing;
    } else {
      throw IoError("grid: unknown axis '" + key + "'");
    }
  }
  return base;
}

void write_harmonic_csv(std::ostream& os, const std::vector<GridSample>& samples) {
  os << "z,rho,U,Uz,Urho,Uzz,Urhorho,Urhoz,H\n";
  for (const GridSample& s : samples) {
    os << format_double(s.z) << ',' << format_double(s.rho) << ','
       << format_double(s.eval.U) << ',' << format_double(s.eval.Uz) << ','
       << format_double(s.eval.Urho) << ',' << format_double(s.eval.Uzz) << ','
       << format_double(s.eval.Urhorho) << ',' << format_double(s.eval.Urhoz) << ','
       << format_double(s.eval.H) << '\n';
  }
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricsSample>& samples) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  os << "z,rho,scal,V,mu,x1,x2\n";
  for (const MetricsSample& s : samples) {
    const double x1 = s.metrics.x ? (*s.metrics.x)[0] : nan;
    const double x2 = s.metrics.x ? (*s.metrics.x)[1] : nan;
    os << format_double(s.z) << ',' << format_double(s.rho) << ','
       << format_double(s.metrics.scal) << ',' << format_double(s.metrics.V) << ','
       << format_double(s.metrics.mu) << ',' << format_double(x1) << ','
       << format_double(x2) << '\n';
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write file: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Conjugacy probe and pipeline assembly
// ---------------------------------------------------------------------------

double max_cr_residual(const BoundaryProfile& profile) {
  // Fourth-order five-point stencil.  The step balances truncation (~h^4,
  // growing like r^-4 near kinks) against roundoff (~|H| eps / h); probes sit
  // at rho >= 1 — at least unit distance from every kink — and within a small
  // window so |H| stays modest even for large kink coefficients.
  constexpr double h = 1.5e-3;
  const auto H = [&](double z, double rho) { return eval_H(profile, z, rho); };
  const auto d4 = [](double fm2, double fm1, double fp1, double fp2) {
    return (-fp2 + 8 * fp1 - 8 * fm1 + fm2) / (12 * h);
  };

  const std::array<double, 6> zs{-1.6, -0.9, -0.3, 0.5, 1.1, 1.6};
  const std::array<double, 3> rhos{1.0, 1.4, 2.0};

  double worst = 0;
  for (const double z : zs) {
    for (const double rho : rhos) {
      bool safe = true;
      for (const auto& k : profile.kinks) {
        if (std::hypot(z - k.z, rho) < 0.99) safe = false;
      }
      if (!safe) continue;
      const auto e = eval_partials(profile, z, rho);
      const double Hz = d4(H(z - 2 * h, rho), H(z - h, rho), H(z + h, rho), H(z + 2 * h, rho));
      const double Hrho =
          d4(H(z, rho - 2 * h), H(z, rho - h), H(z, rho + h), H(z, rho + 2 * h));
      worst = std::max(worst, std::abs(Hz - rho * e.Urho));
      worst = std::max(worst, std::abs(Hrho + rho * e.Uz));
    }
  }
  return worst;
}

namespace {

double euclid_length_of_edge(const PuncturedPolytope& pp, int edge) {
  const auto ends = pp.edge_endpoints(edge);
  return std::hypot(to_double(ends.second.x - ends.first.x),
                    to_double(ends.second.y - ends.first.y));
}

ResidualSummary residual_summary(const BoundaryProfile& profile, const Config& config,
                                 std::vector<std::string>& failures) {
  ResidualSummary summary;
  summary.min_scal = std::numeric_limits<double>::infinity();
  summary.min_V = std::numeric_limits<double>::infinity();

  bool scal_singular = false;
  const std::vector<GridSample> samples = sample_grid(profile, config.grid);
  for (const GridSample& s : samples) {
    const auto& e = s.eval;
    const double axial = e.Urho / s.rho;
    const double lap = e.Urhorho + e.Uzz + axial;
    const double scale =
        std::max({std::abs(e.Urhorho), std::abs(e.Uzz), std::abs(axial), 1e-300});
    summary.max_harmonic_residual = std::max(summary.max_harmonic_residual, std::abs(lap) / scale);
    try {
      summary.min_scal = std::min(summary.min_scal, scal_value(profile, s.z, s.rho));
    } catch (const SingularScalError&) {
      scal_singular = true;
    }
    const double denom = e.Urhoz * e.Urhoz + e.Uzz * e.Uzz;
    const double V = -(s.rho * e.Urho + e.Urho * e.Urho * e.Uzz / denom);
    summary.min_V = std::min(summary.min_V, V);
  }
  if (scal_singular) failures.push_back("scal denominator vanishes on the sample grid");

  summary.max_cr_residual = max_cr_residual(profile);

  std::vector<double> z_probes;
  const double z_lo = profile.kinks.front().z;
  const double z_hi = profile.kinks.back().z;
  z_probes.push_back(0.5 * (z_lo + z_hi) + (profile.kinks.size() == 1 ? 0.13 : 0.0));
  z_probes.push_back(z_lo - 1.1);
  z_probes.push_back(z_hi + 1.1);
  z_probes.push_back(0.5 * (z_lo + z_hi) + 0.37);
  std::vector<double> rho_seq;
  for (int k = 2; k <= 8; ++k) rho_seq.push_back(std::pow(10.0, -k));
  summary.boundary_limit_trend.assign(rho_seq.size(), 0.0);
  for (const double z : z_probes) {
    const std::vector<double> residuals = boundary_limit_residual(profile, z, rho_seq);
    for (std::size_t k = 0; k < residuals.size(); ++k) {
      summary.boundary_limit_trend[k] =
          std::max(summary.boundary_limit_trend[k], residuals[k]);
    }
  }
  summary.boundary_trend_decreasing = true;
  for (std::size_t k = 1; k < summary.boundary_limit_trend.size(); ++k) {
    if (!(summary.boundary_limit_trend[k] < summary.boundary_limit_trend[k - 1])) {
      summary.boundary_trend_decreasing = false;
    }
  }

  if (summary.max_harmonic_residual > config.harmonic_residual) {
    failures.push_back("harmonic residual above tolerance");
  }
  if (summary.max_cr_residual > config.cr_residual) {
    failures.push_back("conjugacy residual above tolerance");
  }
  if (!(summary.min_scal > 0)) failures.push_back("scal not positive on the sample grid");
  if (!(summary.min_V > 0)) failures.push_back("V not positive on the sample grid");
  if (!summary.boundary_trend_decreasing) {
    failures.push_back("boundary-limit residual not decreasing towards the axis");
  }
  return summary;
}

}  // namespace

PipelineReport run_pipeline(const PuncturedPolytope& pp, const PipelineOptions& options,
                            const Config& config) {
  PipelineReport report;
  report.validation = validate(pp.polygon());
  if (!report.validation.pass) {
    report.failures.push_back("polytope validation failed: " + report.validation.summary);
    return report;
  }

  report.affine = extremal_affine(pp);

  PuncturedPolytope npp;
  try {
    auto [normalized_pp, extremal] = normalize(pp, report.affine);
    npp = std::move(normalized_pp);
    report.extremal = extremal;
  } catch (const NotNormalizableError& e) {
    report.failures.push_back(std::string("normalization failed: ") + e.what());
    return report;
  }
  if (report.extremal.scalar_flat) {
    report.failures.push_back("extremal direction vanishes (scalar-flat data); no profile");
    return report;
  }

  const Vec2R eta = report.extremal.eta;
  report.vanishing = scal_vanishing_case(eta, npp);
  report.family = classify_family(npp);

  // Exact data identities carried by the construction.
  {
    const std::vector<Rational> slopes = edge_slopes(eta, npp);
    const ProfileCoefficients coeffs = profile_coefficients(eta, npp);
    Rational sum_a = 0;
    for (const Rational& a : coeffs.a) sum_a += a;
    if (coeffs.B - sum_a != slopes.front() || coeffs.B + sum_a != slopes.back()) {
      report.failures.push_back("slope telescoping identity violated");
    }
    if (slopes.front() != 0 && slopes.back() != 0 && coeffs.B != 0) {
      report.failures.push_back("drift nonzero although both end slopes are nonzero");
    }
  }

  if (!(options.A > 0)) {
    report.failures.push_back("A must be positive");
    return report;
  }

  const int d = npp.surviving_count();
  const ProfileCoefficients coeffs = profile_coefficients(eta, npp);
  std::vector<double> nodes;
  if (options.nodes) {
    nodes = *options.nodes;
  } else if (options.solve) {
    NodeSolveProblem problem;
    problem.pp = npp;
    problem.eta = eta;
    problem.A = options.A;
    for (int i = 2; i <= d - 1; ++i) {
      problem.targets.push_back(euclid_length_of_edge(npp, i));
    }
    NodeSolveResult solved = solve_nodes(problem, config.solver_tol);
    if (!solved.converged) {
      report.failures.push_back("node solve did not converge");
    }
    nodes = solved.nodes;
    report.solve = std::move(solved);
  } else if (d == 2) {
    nodes = {0.0};
  } else {
    report.failures.push_back("node positions required: pass --nodes or --solve");
    return report;
  }

  std::vector<double> a_doubles;
  a_doubles.reserve(coeffs.a.size());
  for (const Rational& a : coeffs.a) a_doubles.push_back(to_double(a));
  try {
    report.profile = build_profile(options.A, to_double(coeffs.B), a_doubles, nodes);
  } catch (const ProfileError& e) {
    report.failures.push_back(std::string("profile assembly failed: ") + e.what());
    return report;
  }

  report.admissibility = admissibility(report.profile);
  if (!report.admissibility.admissible) {
    for (const std::string& r : report.admissibility.reasons) {
      report.failures.push_back("not admissible: " + r);
    }
  }

  if (report.solve && report.solve->converged) {
    double worst = 0;
    for (const double r : report.solve->residuals) worst = std::max(worst, std::abs(r));
    if (worst > config.solver_tol) {
      report.failures.push_back("solver residual above tolerance");
    }
  }

  report.residuals = residual_summary(report.profile, config, report.failures);
  report.pass = report.failures.empty();
  return report;
}

Json pipeline_to_json(const PipelineReport& report) {
  Json j = Json::object();
  j["validation"] = validation_to_json(report.validation);
  if (report.validation.pass) {
    j["extremal"] = extremal_to_json(report.affine, report.extremal);
    j["profile"] = profile_to_json(report.profile);
    j["admissibility"] = admissibility_to_json(report.admissibility);
    j["vanishing_case"] = to_string(report.vanishing);
    j["family"] = to_string(report.family);
    if (report.solve) j["solve"] = solve_to_json(*report.solve);
    if (report.residuals) {
      const ResidualSummary& s = *report.residuals;
      Json rj = Json::object();
      rj["max_harmonic_residual"] = json_real(s.max_harmonic_residual);
      rj["max_cr_residual"] = json_real(s.max_cr_residual);
      rj["min_scal"] = json_real(s.min_scal);
      rj["min_V"] = json_real(s.min_V);
      rj["boundary_limit_trend"] = Json::array();
      for (const double t : s.boundary_limit_trend) {
        rj["boundary_limit_trend"].push_back(json_real(t));
      }
      rj["boundary_trend_decreasing"] = s.boundary_trend_decreasing;
      j["residual_summary"] = std::move(rj);
    }
  }
  j["failures"] = report.failures;
  j["pass"] = report.pass;
  return j;
}

}  // namespace toricflat
