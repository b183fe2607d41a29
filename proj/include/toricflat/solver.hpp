#pragma once

// Inverse problem: place the boundary nodes z_1 < ... < z_{d-1} so that the
// divisor volumes predicted by the forward model match prescribed edge
// lengths.  The forward model fixes the profile drift B = 0 (the asymptotic
// regime where all finite volumes exist) and the gauge z_1 = 0, leaving the
// gaps z_2, ..., z_{d-1} as unknowns.
//
// One equation per compact surviving edge i (targets are Euclidean edge
// lengths; the matched quantity is volume = 2*pi*length):
//   pi |nu_i|^2 (z_i - z_{i-1}) / (f(z_{i-1}) f(z_i)) - 2 pi l_i = 0.
// If a compact edge is perpendicular to eta (exact test, at most one), its
// own length carries no independent information in this form; the edge's row
// is dropped, kept only as a diagnostic, and the volume equations of the
// neighbouring edges are added instead (walking outwards symmetrically until
// the system has at least as many rows as unknowns).  Added end-edge rows use
// the half-infinite volumes
//   Vol(E_1) = -pi |nu_1|^2 / (s f(z_1)),   Vol(E_d) = pi |nu_d|^2 / (s' f(z_{d-1}))
// with s = -sum a_i, s' = +sum a_i, and targets from
// replacement_volume_targets (default: 2*pi times the polytope edge length).
//
// The solve is damped Newton with a closed-form Jacobian, least-squares QR
// steps when the system is rectangular, step halving on residual increase,
// and a per-coordinate bisection fallback.  Convergence demands both
// max|F| <= tol and strictly increasing nodes; inconsistent targets produce
// an honest converged = false.

#include "toricflat/polytope.hpp"
#include "toricflat/profile.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace toricflat {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NodeSolveProblem {
  PuncturedPolytope pp;  // normalized
  Vec2R eta;
  double A = 1.0;                // > 0
  std::vector<double> targets;   // Euclidean lengths for E_2 .. E_{d-1}
  // Volume targets for rows that replace a dropped perpendicular edge, keyed
  // by surviving-edge index; missing entries default to 2*pi*edge length.
  std::map<int, double> replacement_volume_targets;
};

struct NodeSolveResult {
  std::vector<double> nodes;      // z_1 = 0, ..., z_{d-1}
  std::vector<double> residuals;  // per-equation F at the returned nodes
  std::vector<int> equation_edges;  // surviving-edge index behind each row
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> notes;
};

// Model volumes of all surviving edges (1..d) at the given nodes, using the
// solver's forward profile (drift 0).  End-edge volumes may be +inf.
std::vector<double> model_volumes(const PuncturedPolytope& pp, const Vec2R& eta,
                                  double A, std::span<const double> nodes);

// Equation residuals at explicit nodes (z_1 must be 0; strictly increasing,
// else SolverError).  Row order matches NodeSolveResult::equation_edges.
std::vector<double> forward_residuals(const NodeSolveProblem& problem,
                                      std::span<const double> nodes);

NodeSolveResult solve_nodes(const NodeSolveProblem& problem, double tol = 1e-10,
                            int max_iter = 100);

}  // namespace toricflat
