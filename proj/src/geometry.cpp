#include "toricflat/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace toricflat {

namespace {

// Quadratic boundary trace on segment j (1-based, between kinks j-1 and j):
// H(z, 0) = s z^2 + 2 C z + K with s the segment slope of f.
struct SegmentTrace {
  double s = 0, C = 0, K = 0;
};

SegmentTrace segment_trace(const BoundaryProfile& profile, std::size_t j) {
  SegmentTrace t;
  t.s = profile.segment_slope(j - 1);
  t.C = profile.A;
  t.K = 0;
  for (std::size_t m = 0; m < profile.kinks.size(); ++m) {
    const double sigma = (m + 1 < j) ? 1.0 : -1.0;  // sign of z - z_m on segment j
    const auto& k = profile.kinks[m];
    t.C -= sigma * k.a * k.z;
    t.K += sigma * k.a * k.z * k.z;
  }
  return t;
}

double edge_norm_sq(const LatticeVector& nu) {
  return static_cast<double>(nu.u1) * nu.u1 + static_cast<double>(nu.u2) * nu.u2;
}

double euclidean_edge_length(const std::pair<Vec2R, Vec2R>& ends) {
  const double dx = to_double(ends.second.x - ends.first.x);
  const double dy = to_double(ends.second.y - ends.first.y);
  return std::hypot(dx, dy);
}

double lattice_edge_length(const std::pair<Vec2R, Vec2R>& ends, const LatticeVector& nu) {
  const Vec2R w{Rational(nu.u2), Rational(-nu.u1)};  // primitive edge tangent
  const Vec2R diff = ends.second - ends.first;
  const Rational t = dot(diff, w) / dot(w, w);
  return std::abs(to_double(t));
}

}  // namespace

Calibration calibrate(const BoundaryProfile& profile, const PuncturedPolytope& pp,
                      const Vec2R& eta) {
  if (eta.x == 0 && eta.y == 0) {
    throw GeometryError("calibration needs a nonzero extremal direction");
  }
  const std::size_t d = pp.surviving_count();
  if (profile.kinks.size() + 1 != d) {
    throw GeometryError("calibration needs one profile kink per polytope corner");
  }

  Calibration cal;
  cal.eta = Eigen::Vector2d(to_double(eta.x), to_double(eta.y));
  cal.eta_norm = cal.eta.norm();
  cal.tau = Eigen::Vector2d(-cal.eta.y(), cal.eta.x()) / cal.eta_norm;

  const std::vector<Rational> slopes = edge_slopes(eta, pp);

  std::vector<Eigen::RowVector3d> rows;
  std::vector<double> rhs_entries;
  for (std::size_t j = 1; j <= d; ++j) {
    if (slopes[j - 1] == 0) continue;  // traversal is automatically edge-parallel
    const SegmentTrace t = segment_trace(profile, j);
    const double kappa = t.C * t.C - t.s * t.K;
    const LatticeVector nu = pp.edge(j).normal;
    const double eta_dot_nu = cal.eta.x() * nu.u1 + cal.eta.y() * nu.u2;
    rows.push_back(Eigen::RowVector3d(4 * cal.eta_norm * kappa,
                                      -4 * cal.eta_norm * t.s, 0.0));
    rhs_entries.push_back(eta_dot_nu);
  }
  for (std::size_t i = 1; i < d; ++i) {
    const double z = profile.kinks[i - 1].z;
    const Vec2R corner = pp.shared_vertex(i);
    rows.push_back(Eigen::RowVector3d(mu_boundary(profile, z), 2 / profile.f(z), 1.0));
    rhs_entries.push_back(cal.tau.x() * to_double(corner.x) +
                          cal.tau.y() * to_double(corner.y));
  }

  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), 3);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    M.row(static_cast<Eigen::Index>(r)) = rows[r];
    rhs(static_cast<Eigen::Index>(r)) = rhs_entries[r];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
  cal.well_posed = qr.rank() == 3;
  const Eigen::Vector3d sol = qr.solve(rhs);
  cal.a = sol(0);
  cal.q = sol(1);
  cal.b = sol(2);
  cal.residual = (M * sol - rhs).lpNorm<Eigen::Infinity>();
  return cal;
}

Eigen::Vector2d reconstruct_moment_coords(const Calibration& cal,
                                          const BoundaryProfile& profile, double z,
                                          double rho) {
  const double scal = scal_value(profile, z, rho);
  const double mu = (rho > 0) ? mu_value(profile, z, rho) : mu_boundary(profile, z);
  const double t = cal.a * mu + 4 * cal.q * scal + cal.b;
  return (scal / (cal.eta_norm * cal.eta_norm)) * cal.eta + t * cal.tau;
}

VolumeReport divisor_volumes(const BoundaryProfile& profile, const PuncturedPolytope& pp,
                             const Vec2R& eta) {
  constexpr double pi = std::numbers::pi;
  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();

  const std::size_t d = pp.surviving_count();
  if (profile.kinks.size() + 1 != d) {
    throw GeometryError("divisor volumes need one profile kink per polytope corner");
  }
  const std::vector<Rational> slopes = edge_slopes(eta, pp);

  VolumeReport report;
  for (std::size_t i = 1; i <= d; ++i) {
    EdgeVolume ev;
    ev.edge = static_cast<int>(i);
    ev.compact = pp.is_compact_edge(i);
    ev.formula_inapplicable = (slopes[i - 1] == 0);
    if (ev.formula_inapplicable) {
      ev.note = "edge perpendicular to eta: the endpoint-difference display "
                "degenerates; reporting its continuous limit";
    }

    const auto ends = pp.edge_endpoints(i);
    const LatticeVector nu = pp.edge(i).normal;
    ev.euclidean_length = euclidean_edge_length(ends);
    ev.lattice_length = lattice_edge_length(ends, nu);

    const double nu_sq = edge_norm_sq(nu);
    if (ev.compact) {
      const double z_lo = profile.kinks[i - 2].z;
      const double z_hi = profile.kinks[i - 1].z;
      const double f_lo = profile.f(z_lo);
      const double f_hi = profile.f(z_hi);
      if (f_lo <= 0 || f_hi <= 0) {
        ev.volume = nan;
        ev.note = "profile not positive at the edge's nodes";
      } else {
        ev.volume = pi * nu_sq * (z_hi - z_lo) / (f_lo * f_hi);
      }
    } else if (i == 1) {
      const double slope = profile.segment_slope(0);
      const double f1 = profile.f(profile.kinks.front().z);
      if (f1 <= 0) {
        ev.volume = nan;
        ev.note = "profile not positive at the edge's node";
      } else if (slope < 0) {
        ev.volume = -pi * nu_sq / (slope * f1);
      } else {
        ev.volume = inf;
        ev.note = "half-infinite segment with non-divergent profile";
      }
    } else {  // i == d
      const double slope = profile.segment_slope(d - 1);
      const double fd = profile.f(profile.kinks.back().z);
      if (fd <= 0) {
        ev.volume = nan;
        ev.note = "profile not positive at the edge's node";
      } else if (slope > 0) {
        ev.volume = pi * nu_sq / (slope * fd);
      } else {
        ev.volume = inf;
        ev.note = "half-infinite segment with non-divergent profile";
      }
    }
    ev.consistency_residual = ev.volume - 2 * pi * ev.euclidean_length;
    report.edges.push_back(std::move(ev));
  }
  return report;
}

std::vector<MetricsSample> sample_metrics(const BoundaryProfile& profile,
                                          const GridSpec& spec,
                                          const Calibration* calibration) {
  const std::vector<double> zs = grid_axis(spec.z_min, spec.z_max, spec.z_count, false);
  const std::vector<double> rhos =
      grid_axis(spec.rho_min, spec.rho_max, spec.rho_count, spec.rho_log);

  std::vector<MetricsSample> out;
  out.reserve(zs.size() * rhos.size());
  for (const double rho : rhos) {
    for (const double z : zs) {
      MetricsSample s;
      s.z = z;
      s.rho = rho;
      s.metrics.scal = scal_value(profile, z, rho);
      s.metrics.mu = (rho > 0) ? mu_value(profile, z, rho) : mu_boundary(profile, z);
      s.metrics.V = V_quantity(profile, z, rho);
      if (calibration != nullptr) {
        const Eigen::Vector2d x = reconstruct_moment_coords(*calibration, profile, z, rho);
        s.metrics.x = std::array<double, 2>{x.x(), x.y()};
      }
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace toricflat
