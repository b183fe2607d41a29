#pragma once

// Closed-form axi-symmetric harmonic function attached to a boundary profile,
// its partial derivatives, and its harmonic conjugate.
//
// With r_i = sqrt(rho^2 + (z - z_i)^2) and L_i = log((r_i + z - z_i)/rho):
//
//   U       = 2 sum_i a_i (r_i - (z - z_i) L_i) + (A + Bz) log(rho^2)
//   rho*U_rho = 2 (A + Bz + sum_i a_i r_i)
//   U_z     = -2 sum_i a_i L_i + B log(rho^2)
//   U_zz    = -2 sum_i a_i / r_i
//   U_rhoz  =  2 sum_i a_i (z - z_i)/(rho r_i) + 2B/rho
//   U_rhorho= -2 sum_i a_i (z - z_i)^2/(rho^2 r_i) - 2(A + Bz)/rho^2
//
//   H       = 2Az + Bz^2 - (B/2) rho^2 (log(rho^2) - 1)
//             + sum_i a_i ((z - z_i) r_i + rho^2 L_i)
//
// U_rhorho + U_zz + U_rho/rho = 0 and H_z = rho U_rho, H_rho = -rho U_z hold
// identically in these forms (each locked by tests, including a finite-
// difference check with B != 0 for the 2B/rho term in U_rhoz, which is easy
// to drop when differentiating U_z by hand).  The closed forms are the source
// of truth; finite differences appear only as test oracles.
//
// Everything is templated on the scalar so the test suite can re-evaluate in
// 50-digit floating point as an independent oracle.

#include "toricflat/profile.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace toricflat {

template <class Real>
struct HarmonicEval {
  Real U{}, Uz{}, Urho{}, Uzz{}, Urhorho{}, Urhoz{}, H{};
};

namespace detail {

// log((r + s)/rho) loses every digit when s < 0 and |s| >> rho, since
// r + s -> rho^2/(2|s|); (r + s)(r - s) = rho^2 turns it into the stable
// -log((r - s)/rho).
template <class Real>
Real log_ratio(const Real& r, const Real& s, const Real& rho) {
  using std::log;
  if (s >= 0) return log((r + s) / rho);
  return -log((r - s) / rho);
}

template <class Real>
void require_positive_rho(const Real& rho) {
  if (!(rho > 0)) throw std::domain_error("evaluation requires rho > 0");
}

}  // namespace detail

template <class Real>
Real eval_U(const BoundaryProfileT<Real>& profile, const Real& z, const Real& rho) {
  detail::require_positive_rho(rho);
  using std::log;
  using std::sqrt;
  Real value = (profile.A + profile.B * z) * log(rho * rho);
  for (const auto& k : profile.kinks) {
    const Real s = z - k.z;
    const Real r = sqrt(rho * rho + s * s);
    value += 2 * k.a * (r - s * detail::log_ratio(r, s, rho));
  }
  return value;
}

template <class Real>
HarmonicEval<Real> eval_partials(const BoundaryProfileT<Real>& profile, const Real& z,
                                 const Real& rho) {
  detail::require_positive_rho(rho);
  using std::log;
  using std::sqrt;
  const Real log_rho2 = log(rho * rho);
  const Real drift = profile.A + profile.B * z;

  HarmonicEval<Real> e;
  e.U = drift * log_rho2;
  Real sum_ar = 0;     // sum a_i r_i
  Real sum_aL = 0;     // sum a_i L_i
  Real sum_ainv = 0;   // sum a_i / r_i
  Real sum_as_rr = 0;  // sum a_i s_i / r_i
  Real sum_ass = 0;    // sum a_i s_i^2 / r_i
  Real sum_H = 0;      // sum a_i (s_i r_i + rho^2 L_i)
  for (const auto& k : profile.kinks) {
    const Real s = z - k.z;
    const Real r = sqrt(rho * rho + s * s);
    const Real L = detail::log_ratio(r, s, rho);
    e.U += 2 * k.a * (r - s * L);
    sum_ar += k.a * r;
    sum_aL += k.a * L;
    sum_ainv += k.a / r;
    sum_as_rr += k.a * s / r;
    sum_ass += k.a * s * s / r;
    sum_H += k.a * (s * r + rho * rho * L);
  }
  e.Urho = 2 * (drift + sum_ar) / rho;
  e.Uz = -2 * sum_aL + profile.B * log_rho2;
  e.Uzz = -2 * sum_ainv;
  e.Urhoz = 2 * sum_as_rr / rho + 2 * profile.B / rho;
  e.Urhorho = -2 * sum_ass / (rho * rho) - 2 * drift / (rho * rho);
  e.H = 2 * profile.A * z + profile.B * z * z -
        (profile.B / 2) * rho * rho * (log_rho2 - 1) + sum_H;
  return e;
}

template <class Real>
Real eval_H(const BoundaryProfileT<Real>& profile, const Real& z, const Real& rho) {
  return eval_partials(profile, z, rho).H;
}

struct GridSpec {
  double z_min = -5.0, z_max = 5.0;
  int z_count = 101;
  double rho_min = 0.01, rho_max = 10.0;
  int rho_count = 101;
  bool rho_log = false;  // geometric spacing for rho
};

std::vector<double> grid_axis(double lo, double hi, int count, bool log_spaced);

struct GridSample {
  double z = 0, rho = 0;
  HarmonicEval<double> eval;
};

// Row-major samples, rho outer and z inner; evaluated in parallel chunks with
// deterministic placement.
std::vector<GridSample> sample_grid(const BoundaryProfile& profile, const GridSpec& spec);

// |U(z, rho)/log(rho^2) - f(z)| along a decreasing positive rho sequence.
// The limit holds at order 1/|log rho|, so residual * |log(rho^2)| stabilizes;
// callers should keep z away from kink positions where the limit constant
// degenerates.
std::vector<double> boundary_limit_residual(const BoundaryProfile& profile, double z,
                                            const std::vector<double>& rho_seq);

// Central finite-difference f_rhorho + f_zz + (dim-2) f_rho/rho for the
// axi-symmetric Laplacian of R^3 (dim 3) or R^5 (dim 5).
double axisym_laplacian(int dim, const std::function<double(double, double)>& fn, double z,
                        double rho, double step);

// gamma = (U_rho(p1) - U_rho(p2))/rho, the comparison function whose
// 5-dimensional axi-symmetric harmonicity drives the uniqueness argument.
struct GammaReport {
  double max_abs_gamma = 0;
  double max_laplacian5_residual = 0;
  // max over the grid of |gamma| * rho^2 / R with R = sqrt(z^2 + rho^2):
  // finite exactly when gamma obeys the C*R/rho^2 growth bound.
  double max_growth_ratio = 0;
};

GammaReport compare_profiles(const BoundaryProfile& p1, const BoundaryProfile& p2,
                             const GridSpec& grid);

}  // namespace toricflat
