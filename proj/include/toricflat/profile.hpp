#pragma once

// Boundary profile f(z) = A + Bz + sum_i a_i |z - z_i| and its derivation
// from a punctured polytope.
//
// Each surviving edge E_i corresponds to a segment of the boundary line, in
// order: E_1 <-> ]-inf, z_1[, E_i <-> ]z_{i-1}, z_i[, E_d <-> ]z_{d-1}, +inf[.
// On the segment of E_i the profile is affine with slope s_i = det(eta, nu_i),
// so the kink coefficients are the half-jumps a_j = det(eta, nu_{j+1}-nu_j)/2
// and the linear drift is B = det(eta, nu_1+nu_d)/2.  Slopes increase with i
// exactly when all a_j > 0; f is then convex and positive for A > 0.
//
// Slope and coefficient computations stay in exact rational arithmetic: every
// "is this determinant zero" decision downstream (perpendicular edges, the
// vanishing-locus case split) is exact, never an epsilon test.

#include "toricflat/polytope.hpp"
#include "toricflat/rational.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace toricflat {

template <class Real>
struct Kink {
  Real z;
  Real a;
};

template <class Real>
struct BoundaryProfileT {
  Real A{};
  Real B{};
  std::vector<Kink<Real>> kinks;  // positions strictly increasing

  Real f(Real z) const {
    Real value = A + B * z;
    for (const auto& k : kinks) {
      using std::abs;
      value += k.a * abs(z - k.z);
    }
    return value;
  }

  // Slope of f on the segment between kinks i and i+1 (i = 0 means left of
  // all kinks): B - sum_{j > i} a_j + sum_{j <= i} a_j.
  Real segment_slope(int i) const {
    Real slope = B;
    for (int j = 0; j < static_cast<int>(kinks.size()); ++j) {
      slope += (j < i ? kinks[static_cast<size_t>(j)].a : -kinks[static_cast<size_t>(j)].a);
    }
    return slope;
  }
};

using BoundaryProfile = BoundaryProfileT<double>;

enum class FamilyLabel { ReversedTaubNUT, KerrTaubBolt, ChenTeo, Unclassified };

std::string to_string(FamilyLabel label);

// Where the conformal factor vanishes on the completed space, decided by the
// two end slopes (det(eta, nu_1), det(eta, nu_d)): along the removed divisor
// when both are nonzero, at a single end vertex when exactly one vanishes,
// nowhere when both vanish.
struct VanishingCase {
  enum class Kind { AlongD, AtVertex, Nowhere };
  Kind kind = Kind::AlongD;
  int end = 0;  // 1 or d for AtVertex, otherwise 0
};

std::string to_string(const VanishingCase& c);

// s_i = det(eta, nu_i) for the surviving edges, in order i = 1..d.
std::vector<Rational> edge_slopes(const Vec2R& eta, const PuncturedPolytope& pp);

// Kink coefficients and drift: a_j = det(eta, nu_{j+1} - nu_j)/2 for
// j = 1..d-1, B = det(eta, nu_1 + nu_d)/2.
struct ProfileCoefficients {
  std::vector<Rational> a;
  Rational B;
};

ProfileCoefficients profile_coefficients(const Vec2R& eta, const PuncturedPolytope& pp);

struct ProfileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Assembles an evaluable profile; throws ProfileError when the node list is
// not strictly increasing or the lengths disagree.
template <class Real>
BoundaryProfileT<Real> build_profile(Real A, Real B, const std::vector<Real>& coeffs,
                                     const std::vector<Real>& nodes) {
  if (coeffs.size() != nodes.size()) {
    throw ProfileError("coefficient and node counts differ");
  }
  const auto violation = std::adjacent_find(
      nodes.begin(), nodes.end(), [](const Real& x, const Real& y) { return x >= y; });
  if (violation != nodes.end()) {
    throw ProfileError("kink positions must be strictly increasing");
  }
  BoundaryProfileT<Real> profile;
  profile.A = A;
  profile.B = B;
  profile.kinks.reserve(coeffs.size());
  for (size_t i = 0; i < coeffs.size(); ++i) profile.kinks.push_back({nodes[i], coeffs[i]});
  return profile;
}

// Admissibility audit: A > 0, every kink coefficient positive, no linear
// drift, and f positive across the kink range.  Failures are reasons, not
// errors.
struct AdmissibilityReport {
  bool positive_A = false;
  bool positive_coefficients = false;
  bool zero_drift = false;        // B == 0
  bool positive_profile = false;  // f > 0 on the node range
  bool admissible = false;
  std::vector<std::string> reasons;
};

AdmissibilityReport admissibility(const BoundaryProfile& profile);

VanishingCase scal_vanishing_case(const Vec2R& eta, const PuncturedPolytope& pp);

// d = 2, 3, 4 surviving edges map to the three known families.
FamilyLabel classify_family(const PuncturedPolytope& pp);

}  // namespace toricflat
