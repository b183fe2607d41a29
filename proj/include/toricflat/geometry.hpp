#pragma once

// Derived metric quantities on the half-plane and their polytope-side
// counterparts: the scalar-curvature function, the positivity witness V, the
// second moment coordinate mu, the reconstruction of moment coordinates, and
// per-edge divisor volumes.
//
// Conventions:
//   scal(z, rho) = 1/(rho U_rho) = 1/(2 (A + Bz + sum a_i r_i))  (finite at rho = 0)
//   V            = -(rho U_rho + U_rho^2 U_zz / (U_rhoz^2 + U_zz^2))
//   mu           = 2 ((rho^2 U_z + 2H)/(rho U_rho) - z), with H's additive
//                  constant fixed to 0; adding a constant c to H shifts mu by
//                  4c/(rho U_rho) = 4c*scal, which is why the reconstruction
//                  calibration below carries a q-term (q = a*c): it is an
//                  affine image of mu with a recalibrated H constant.
//
// Reconstruction: the moment coordinates of a point split along eta and its
// unit normal tau; the eta component is pinned exactly by eta.x = scal, and
// the transverse component is t = a*mu + 4q*scal + b with (a, q, b) solved by
// least squares from two row families:
//   - per non-perpendicular surviving edge j, traversing the corresponding
//     boundary segment must move parallel to the edge:
//       4|eta| kappa_j a - 4|eta| s_j q = <eta, nu_j>,
//     where the boundary trace H(z,0) = s_j z^2 + 2 C_j z + K_j on segment j
//     and kappa_j = C_j^2 - s_j K_j (mu is (2C_j z + 2K_j)/f there);
//   - per kink i, the kink point (z_i, 0) must land on the polytope corner
//     shared by edges E_i and E_{i+1}:
//       mu(z_i,0) a + (2/f(z_i)) q + b = <tau, corner_i>.
// The system is square (3x3) and exact for d = 2; overdetermined for d >= 3
// with the residual reported, since generic inputs need not be realizable.

#include "toricflat/harmonic.hpp"
#include "toricflat/polytope.hpp"
#include "toricflat/profile.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace toricflat {

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularScalError : GeometryError {
  using GeometryError::GeometryError;
};
struct DegenerateProfileError : GeometryError {
  using GeometryError::GeometryError;
};

// 1/(2 (A + Bz + sum a_i r_i)); valid for rho >= 0 (the closed form is finite
// on the boundary, where it equals 1/(2 f(z))).  Throws SingularScalError when
// the denominator vanishes.
template <class Real>
Real scal_value(const BoundaryProfileT<Real>& profile, const Real& z, const Real& rho) {
  if (rho < 0) throw std::domain_error("scal requires rho >= 0");
  using std::sqrt;
  Real denom = profile.A + profile.B * z;
  for (const auto& k : profile.kinks) {
    const Real s = z - k.z;
    denom += k.a * sqrt(rho * rho + s * s);
  }
  denom *= 2;
  if (denom == 0) throw SingularScalError("scal denominator vanishes");
  return 1 / denom;
}

// Positivity witness; requires rho > 0 and at least one kink (without kinks
// U_rhoz = U_zz = 0 and the expression is 0/0 — reported as degenerate, never
// extended by limits; kink-free data has no finite edges to witness).
template <class Real>
Real V_quantity(const BoundaryProfileT<Real>& profile, const Real& z, const Real& rho) {
  if (profile.kinks.empty()) {
    throw DegenerateProfileError("V is 0/0 for a kink-free profile");
  }
  const auto e = eval_partials(profile, z, rho);
  const Real denom = e.Urhoz * e.Urhoz + e.Uzz * e.Uzz;
  return -(rho * e.Urho + e.Urho * e.Urho * e.Uzz / denom);
}

// Second moment coordinate with H's additive constant fixed to 0.
template <class Real>
Real mu_value(const BoundaryProfileT<Real>& profile, const Real& z, const Real& rho) {
  const auto e = eval_partials(profile, z, rho);
  const Real rho_Urho = rho * e.Urho;
  if (rho_Urho == 0) throw SingularScalError("rho U_rho vanishes");
  return 2 * ((rho * rho * e.Uz + 2 * e.H) / rho_Urho - z);
}

// Boundary trace H(z, 0) = 2Az + Bz^2 + sum a_i (z - z_i)|z - z_i| (the
// rho^2 log terms vanish in the limit); used by the calibration rows and by
// the boundary value mu(z, 0) = 2 (H(z,0)/f(z) - z).
template <class Real>
Real boundary_H(const BoundaryProfileT<Real>& profile, const Real& z) {
  using std::abs;
  Real value = 2 * profile.A * z + profile.B * z * z;
  for (const auto& k : profile.kinks) value += k.a * (z - k.z) * abs(z - k.z);
  return value;
}

template <class Real>
Real mu_boundary(const BoundaryProfileT<Real>& profile, const Real& z) {
  return 2 * (boundary_H(profile, z) / profile.f(z) - z);
}

// Transverse-coordinate calibration data.  tau is eta rotated a quarter turn
// and normalized; t(z, rho) = a*mu + 4q*scal + b.
struct Calibration {
  double a = 0, q = 0, b = 0;
  double residual = 0;    // max-norm least-squares row residual
  bool well_posed = false;  // full-rank row system
  Eigen::Vector2d eta{0, 0};
  double eta_norm = 0;
  Eigen::Vector2d tau{0, 0};
};

// Builds the calibration rows from a *normalized* punctured polytope (zero
// constant term, so <eta, corner> is the boundary scal denominator) and the
// profile whose kinks correspond to its corners.  Throws GeometryError when
// eta = 0 or the kink count does not match.
Calibration calibrate(const BoundaryProfile& profile, const PuncturedPolytope& pp,
                      const Vec2R& eta);

// x(z, rho) = scal * eta/|eta|^2 + t * tau.  rho = 0 allowed.
Eigen::Vector2d reconstruct_moment_coords(const Calibration& cal,
                                          const BoundaryProfile& profile, double z,
                                          double rho);

// Per-edge divisor volume report.  The volume of the divisor over edge i is
//   2 pi * integral of |nu_i|^2 / (2 f^2) over the edge's z-segment
// which evaluates to pi |nu_i|^2 (z_i - z_{i-1}) / (f(z_{i-1}) f(z_i)) on
// compact edges — including perpendicular ones, where the textbook display
// pi |nu|^2 / s * (1/f(z_{i-1}) - 1/f(z_i)) degenerates to 0/0; the flag
// records that the displayed form is inapplicable while the value carries its
// continuous limit.  The two end edges integrate over half-infinite segments
// and stay finite exactly when their slope pushes f to +infinity.
struct EdgeVolume {
  int edge = 0;  // surviving-edge index, 1-based
  bool compact = false;
  bool formula_inapplicable = false;  // det(eta, nu_i) = 0 (exact test)
  double volume = 0;                  // may be +inf for end edges
  double euclidean_length = 0;        // of the polytope edge
  double lattice_length = 0;
  double consistency_residual = 0;    // volume - 2*pi*euclidean_length
  std::string note;
};

struct VolumeReport {
  std::vector<EdgeVolume> edges;
};

// Requires profile.kinks.size() == d - 1 (nodes assigned to the corners).
VolumeReport divisor_volumes(const BoundaryProfile& profile, const PuncturedPolytope& pp,
                             const Vec2R& eta);

// One evaluated metric point (reconstruction optional).
struct PointMetrics {
  double scal = 0;
  double mu = 0;
  double V = 0;
  std::optional<std::array<double, 2>> x;
};

struct MetricsSample {
  double z = 0, rho = 0;
  PointMetrics metrics;
};

// Row-major (rho outer, z inner) metric samples; reconstruction filled when a
// calibration is supplied.
std::vector<MetricsSample> sample_metrics(const BoundaryProfile& profile,
                                          const GridSpec& spec,
                                          const Calibration* calibration);

}  // namespace toricflat
