#include "toricflat/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

namespace toricflat {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

double sgn(double v) { return (v > 0) - (v < 0); }

struct Model {
  std::size_t d = 0;                // surviving edges
  std::size_t K = 0;                // nodes (= d - 1)
  std::vector<double> a;            // kink coefficients (drift fixed to 0)
  std::vector<double> norm_sq;      // |nu_i|^2 for edges 1..d
  std::vector<Rational> slopes;     // det(eta, nu_i), exact
  double A = 0;
  double slope_low = 0, slope_high = 0;  // -sum a, +sum a
};

Model build_model(const PuncturedPolytope& pp, const Vec2R& eta, double A) {
  Model m;
  m.d = pp.surviving_count();
  m.K = m.d - 1;
  m.A = A;
  const ProfileCoefficients coeffs = profile_coefficients(eta, pp);
  m.a.reserve(coeffs.a.size());
  double total = 0;
  for (const Rational& c : coeffs.a) {
    m.a.push_back(to_double(c));
    total += m.a.back();
  }
  m.slope_low = -total;
  m.slope_high = total;
  for (std::size_t i = 1; i <= m.d; ++i) {
    const LatticeVector nu = pp.edge(i).normal;
    m.norm_sq.push_back(static_cast<double>(nu.u1) * nu.u1 +
                        static_cast<double>(nu.u2) * nu.u2);
  }
  m.slopes = edge_slopes(eta, pp);
  return m;
}

double f_at(const Model& m, std::span<const double> z, std::size_t k) {
  double f = m.A;
  for (std::size_t j = 0; j < m.K; ++j) f += m.a[j] * std::abs(z[k] - z[j]);
  return f;
}

// d f(z_k) / d z_j
double df_at(const Model& m, std::span<const double> z, std::size_t k, std::size_t j) {
  if (j == k) {
    double s = 0;
    for (std::size_t mm = 0; mm < m.K; ++mm) {
      if (mm != k) s += m.a[mm] * sgn(z[k] - z[mm]);
    }
    return s;
  }
  return -m.a[j] * sgn(z[k] - z[j]);
}

struct Row {
  int edge = 0;       // surviving-edge index, 1-based
  double target = 0;  // volume to match
};

double row_value(const Model& m, const Row& row, std::span<const double> z,
                 std::span<const double> f) {
  const std::size_t i = static_cast<std::size_t>(row.edge);
  if (i == 1) return -pi * m.norm_sq[0] / (m.slope_low * f[0]) - row.target;
  if (i == m.d) return pi * m.norm_sq[m.d - 1] / (m.slope_high * f[m.K - 1]) - row.target;
  const std::size_t lo = i - 2, hi = i - 1;
  return pi * m.norm_sq[i - 1] * (z[hi] - z[lo]) / (f[lo] * f[hi]) - row.target;
}

// Derivative of the row value with respect to z_j.
double row_derivative(const Model& m, const Row& row, std::span<const double> z,
                      std::span<const double> f, std::size_t j) {
  const std::size_t i = static_cast<std::size_t>(row.edge);
  if (i == 1) {
    return pi * m.norm_sq[0] / (m.slope_low * f[0] * f[0]) * df_at(m, z, 0, j);
  }
  if (i == m.d) {
    const std::size_t k = m.K - 1;
    return -pi * m.norm_sq[m.d - 1] / (m.slope_high * f[k] * f[k]) * df_at(m, z, k, j);
  }
  const std::size_t lo = i - 2, hi = i - 1;
  const double gap = z[hi] - z[lo];
  const double prod = f[lo] * f[hi];
  const double d_gap = (j == hi ? 1.0 : 0.0) - (j == lo ? 1.0 : 0.0);
  const double d_prod = df_at(m, z, lo, j) * f[hi] + f[lo] * df_at(m, z, hi, j);
  return pi * m.norm_sq[i - 1] * (d_gap / prod - gap * d_prod / (prod * prod));
}

double euclid_length(const PuncturedPolytope& pp, std::size_t edge) {
  const auto ends = pp.edge_endpoints(edge);
  return std::hypot(to_double(ends.second.x - ends.first.x),
                    to_double(ends.second.y - ends.first.y));
}

struct Assembled {
  Model model;
  std::vector<Row> rows;
  int perp_edge = 0;           // 0 when every compact edge has its own row
  double perp_target_vol = 0;  // 2*pi*length of the dropped edge (diagnostic)
  std::vector<std::string> notes;
};

Assembled assemble(const NodeSolveProblem& problem) {
  Assembled as;
  as.model = build_model(problem.pp, problem.eta, problem.A);
  const std::size_t d = as.model.d;
  if (problem.A <= 0) throw SolverError("A must be positive");
  if (d < 2) throw SolverError("need at least two surviving edges");
  if (problem.targets.size() != d - 2) {
    throw SolverError("expected one length target per compact edge");
  }
  for (const double t : problem.targets) {
    if (!(t > 0)) throw SolverError("length targets must be positive");
  }
  for (const auto& [edge, vol] : problem.replacement_volume_targets) {
    if (edge < 1 || edge > static_cast<int>(d)) {
      throw SolverError("replacement volume target names a nonexistent edge");
    }
    if (!(vol > 0)) throw SolverError("replacement volume targets must be positive");
  }

  std::set<int> present;
  for (std::size_t i = 2; i + 1 <= d && i <= d - 1; ++i) {
    if (as.model.slopes[i - 1] == 0) {
      if (as.perp_edge != 0) {
        throw SolverError("more than one compact edge is perpendicular to eta");
      }
      as.perp_edge = static_cast<int>(i);
      as.perp_target_vol = 2 * pi * problem.targets[i - 2];
      continue;
    }
    as.rows.push_back(Row{static_cast<int>(i), 2 * pi * problem.targets[i - 2]});
    present.insert(static_cast<int>(i));
  }

  if (as.perp_edge != 0) {
    const auto replacement = [&](int j) {
      const auto it = problem.replacement_volume_targets.find(j);
      if (it != problem.replacement_volume_targets.end()) return it->second;
      return 2 * pi * euclid_length(problem.pp, static_cast<std::size_t>(j));
    };
    std::ostringstream note;
    note << "edge " << as.perp_edge
         << " is perpendicular to eta; its length target is diagnostic only and its "
            "row is replaced by neighbouring volume equations for edges";
    const std::size_t unknowns = as.model.K - 1;
    for (int ring = 1;; ++ring) {
      bool any_in_range = false;
      for (const int j : {as.perp_edge - ring, as.perp_edge + ring}) {
        if (j < 1 || j > static_cast<int>(d)) continue;
        any_in_range = true;
        if (present.count(j)) continue;
        as.rows.push_back(Row{j, replacement(j)});
        present.insert(j);
        note << ' ' << j;
      }
      if (ring >= 1 && as.rows.size() >= unknowns) break;
      if (!any_in_range) break;
    }
    std::ranges::sort(as.rows, {}, &Row::edge);
    as.notes.push_back(note.str());
  }
  return as;
}

bool strictly_increasing(std::span<const double> z) {
  for (std::size_t k = 1; k < z.size(); ++k) {
    if (!(z[k] > z[k - 1])) return false;
  }
  return true;
}

std::vector<double> f_all(const Model& m, std::span<const double> z) {
  std::vector<double> f(m.K);
  for (std::size_t k = 0; k < m.K; ++k) f[k] = f_at(m, z, k);
  return f;
}

bool valid_point(const Model& m, std::span<const double> z) {
  if (!strictly_increasing(z)) return false;
  for (std::size_t k = 0; k < m.K; ++k) {
    if (!(f_at(m, z, k) > 0)) return false;
  }
  return true;
}

std::vector<double> eval_rows(const Assembled& as, std::span<const double> z) {
  const std::vector<double> f = f_all(as.model, z);
  std::vector<double> F(as.rows.size());
  for (std::size_t r = 0; r < as.rows.size(); ++r) {
    F[r] = row_value(as.model, as.rows[r], z, f);
  }
  return F;
}

double max_abs(std::span<const double> v) {
  double m = 0;
  for (const double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

std::vector<double> model_volumes(const PuncturedPolytope& pp, const Vec2R& eta,
                                  double A, std::span<const double> nodes) {
  const Model m = build_model(pp, eta, A);
  if (nodes.size() != m.K) throw SolverError("expected one node per polytope corner");
  if (!strictly_increasing(nodes)) throw SolverError("nodes must strictly increase");
  const std::vector<double> f = f_all(m, nodes);

  std::vector<double> vols(m.d, inf);
  if (m.slope_low < 0 && f[0] > 0) vols[0] = -pi * m.norm_sq[0] / (m.slope_low * f[0]);
  for (std::size_t i = 2; i <= m.d - 1; ++i) {
    const std::size_t lo = i - 2, hi = i - 1;
    vols[i - 1] = pi * m.norm_sq[i - 1] * (nodes[hi] - nodes[lo]) / (f[lo] * f[hi]);
  }
  if (m.slope_high > 0 && f[m.K - 1] > 0) {
    vols[m.d - 1] = pi * m.norm_sq[m.d - 1] / (m.slope_high * f[m.K - 1]);
  }
  return vols;
}

std::vector<double> forward_residuals(const NodeSolveProblem& problem,
                                      std::span<const double> nodes) {
  const Assembled as = assemble(problem);
  if (nodes.size() != as.model.K) {
    throw SolverError("expected one node per polytope corner");
  }
  if (nodes.empty() || nodes[0] != 0.0) {
    throw SolverError("the gauge fixes the first node at 0");
  }
  if (!strictly_increasing(nodes)) throw SolverError("nodes must strictly increase");
  return eval_rows(as, nodes);
}

NodeSolveResult solve_nodes(const NodeSolveProblem& problem, double tol, int max_iter) {
  const Assembled as = assemble(problem);
  const Model& m = as.model;

  NodeSolveResult result;
  result.notes = as.notes;
  for (const Row& row : as.rows) result.equation_edges.push_back(row.edge);

  if (m.K == 1) {  // d = 2: nothing to place beyond the gauge
    result.nodes = {0.0};
    result.converged = true;
    result.notes.push_back("single node fixed by the gauge; no equations");
    return result;
  }

  const std::size_t n = m.K - 1;  // unknowns z_2 .. z_{d-1}
  std::vector<double> z(m.K, 0.0);
  for (std::size_t k = 1; k < m.K; ++k) {
    const double gap = problem.targets[k - 1];
    z[k] = z[k - 1] + (gap > 0 ? gap : 1.0);
  }

  const auto finish = [&](bool ok, int iters, std::span<const double> zz) {
    result.nodes.assign(zz.begin(), zz.end());
    result.residuals = eval_rows(as, zz);
    result.iterations = iters;
    result.converged = ok;
    if (as.perp_edge != 0) {
      const std::size_t lo = static_cast<std::size_t>(as.perp_edge) - 2;
      const std::size_t hi = lo + 1;
      const std::vector<double> f = f_all(m, zz);
      const double vol =
          pi * m.norm_sq[as.perp_edge - 1] * (zz[hi] - zz[lo]) / (f[lo] * f[hi]);
      std::ostringstream diag;
      diag << "dropped-edge diagnostic: predicted volume minus target = "
           << vol - as.perp_target_vol;
      result.notes.push_back(diag.str());
    }
  };

  int iters = 0;
  std::vector<double> F = eval_rows(as, z);
  for (; iters < max_iter; ++iters) {
    const double res = max_abs(F);
    if (res <= tol && strictly_increasing(z)) {
      finish(true, iters, z);
      return result;
    }

    const std::vector<double> f = f_all(m, z);
    Eigen::MatrixXd J(static_cast<Eigen::Index>(as.rows.size()),
                      static_cast<Eigen::Index>(n));
    Eigen::VectorXd Fv(static_cast<Eigen::Index>(as.rows.size()));
    for (std::size_t r = 0; r < as.rows.size(); ++r) {
      Fv(static_cast<Eigen::Index>(r)) = F[r];
      for (std::size_t c = 0; c < n; ++c) {
        J(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            row_derivative(m, as.rows[r], z, f, c + 1);
      }
    }
    const Eigen::VectorXd du = Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(J).solve(-Fv);
    if (!du.allFinite()) {
      result.notes.push_back("singular Jacobian; stopping");
      finish(false, iters, z);
      return result;
    }

    bool accepted = false;
    double lambda = 1.0;
    std::vector<double> z_trial(m.K);
    for (int halvings = 0; halvings < 40; ++halvings, lambda *= 0.5) {
      z_trial[0] = 0.0;
      for (std::size_t c = 0; c < n; ++c) {
        z_trial[c + 1] = z[c + 1] + lambda * du(static_cast<Eigen::Index>(c));
      }
      if (!valid_point(m, z_trial)) continue;
      const std::vector<double> F_trial = eval_rows(as, z_trial);
      if (max_abs(F_trial) < res) {
        z = z_trial;
        F = F_trial;
        accepted = true;
        break;
      }
    }
    if (accepted) continue;

    // Per-coordinate bisection fallback: pair each unknown z_{r+1} with the
    // compact-edge row that ends at it, when such a row exists, and look for
    // a sign change of that row along the coordinate.
    bool improved = false;
    for (std::size_t c = 0; c < n && !improved; ++c) {
      const std::size_t k = c + 1;  // node index being moved
      const auto row_it = std::ranges::find_if(as.rows, [&](const Row& row) {
        return row.edge >= 2 && row.edge <= static_cast<int>(m.d) - 1 &&
               static_cast<std::size_t>(row.edge) - 1 == k;
      });
      if (row_it == as.rows.end()) continue;
      const auto phi = [&](double x) {
        std::vector<double> zz = z;
        zz[k] = x;
        const std::vector<double> ff = f_all(m, zz);
        return row_value(m, *row_it, zz, ff);
      };
      double lo = z[k - 1] + 1e-12 * (1 + std::abs(z[k - 1]));
      double hi = (k + 1 < m.K) ? z[k + 1] - 1e-12 * (1 + std::abs(z[k + 1]))
                                : z[k] + 8 * (1 + std::abs(z[k]));
      double flo = phi(lo);
      double fhi = phi(hi);
      int expand = 0;
      while (k + 1 >= m.K && flo * fhi > 0 && expand++ < 40) {
        hi = lo + 2 * (hi - lo);
        fhi = phi(hi);
      }
      if (!(flo * fhi <= 0)) continue;
      for (int b = 0; b < 200; ++b) {
        const double mid = 0.5 * (lo + hi);
        const double fm = phi(mid);
        if (flo * fm <= 0) {
          hi = mid;
        } else {
          lo = mid;
          flo = fm;
        }
      }
      std::vector<double> zz = z;
      zz[k] = 0.5 * (lo + hi);
      if (!valid_point(m, zz)) continue;
      const std::vector<double> Fb = eval_rows(as, zz);
      if (max_abs(Fb) < res) {
        z = zz;
        F = Fb;
        improved = true;
      }
    }
    if (!improved) {
      result.notes.push_back("stalled: no step reduced the residual");
      finish(false, iters, z);
      return result;
    }
  }

  result.notes.push_back("no convergence within the iteration limit");
  if (max_abs(F) <= tol && !strictly_increasing(z)) {
    result.notes.push_back("node ordering violated at the stationary point");
  }
  finish(false, iters, z);
  return result;
}

}  // namespace toricflat
