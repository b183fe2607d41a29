#include "toricflat/profile.hpp"

namespace toricflat {

std::string to_string(FamilyLabel label) {
  switch (label) {
    case FamilyLabel::ReversedTaubNUT: return "ReversedTaubNUT";
    case FamilyLabel::KerrTaubBolt: return "KerrTaubBolt";
    case FamilyLabel::ChenTeo: return "ChenTeo";
    case FamilyLabel::Unclassified: return "Unclassified";
  }
  return "Unclassified";
}

std::string to_string(const VanishingCase& c) {
  switch (c.kind) {
    case VanishingCase::Kind::AlongD: return "AlongD";
    case VanishingCase::Kind::AtVertex: return "AtVertex(" + std::to_string(c.end) + ")";
    case VanishingCase::Kind::Nowhere: return "Nowhere";
  }
  return "AlongD";
}

std::vector<Rational> edge_slopes(const Vec2R& eta, const PuncturedPolytope& pp) {
  std::vector<Rational> slopes;
  slopes.reserve(static_cast<size_t>(pp.surviving_count()));
  for (int i = 1; i <= pp.surviving_count(); ++i) {
    slopes.push_back(det(eta, to_vec2r(pp.edge(i).normal)));
  }
  return slopes;
}

ProfileCoefficients profile_coefficients(const Vec2R& eta, const PuncturedPolytope& pp) {
  ProfileCoefficients out;
  const auto slopes = edge_slopes(eta, pp);
  const size_t d = slopes.size();
  out.a.reserve(d - 1);
  for (size_t j = 0; j + 1 < d; ++j) out.a.push_back((slopes[j + 1] - slopes[j]) / 2);
  out.B = (slopes.front() + slopes.back()) / 2;
  return out;
}

AdmissibilityReport admissibility(const BoundaryProfile& profile) {
  AdmissibilityReport report;
  report.positive_A = profile.A > 0;
  if (!report.positive_A) report.reasons.push_back("NonPositiveA");

  report.positive_coefficients = true;
  for (const auto& k : profile.kinks) {
    if (!(k.a > 0)) {
      report.positive_coefficients = false;
      report.reasons.push_back("NonPositiveKinkCoefficient");
      break;
    }
  }

  report.zero_drift = (profile.B == 0);
  if (!report.zero_drift) report.reasons.push_back("NonALFSlope");

  // With convexity in hand f > 0 everywhere iff f > 0 at all kinks; without
  // it, kink values still witness most failures, so check them either way.
  report.positive_profile = true;
  for (const auto& k : profile.kinks) {
    if (!(profile.f(k.z) > 0)) {
      report.positive_profile = false;
      report.reasons.push_back("NonPositiveProfile");
      break;
    }
  }
  if (profile.kinks.empty() && !(profile.A > 0)) report.positive_profile = false;

  report.admissible = report.positive_A && report.positive_coefficients &&
                      report.zero_drift && report.positive_profile;
  return report;
}

VanishingCase scal_vanishing_case(const Vec2R& eta, const PuncturedPolytope& pp) {
  const auto slopes = edge_slopes(eta, pp);
  const bool first_zero = (slopes.front() == 0);
  const bool last_zero = (slopes.back() == 0);
  VanishingCase c;
  if (!first_zero && !last_zero) {
    c.kind = VanishingCase::Kind::AlongD;
  } else if (first_zero && last_zero) {
    c.kind = VanishingCase::Kind::Nowhere;
  } else {
    c.kind = VanishingCase::Kind::AtVertex;
    c.end = first_zero ? 1 : pp.surviving_count();
  }
  return c;
}

FamilyLabel classify_family(const PuncturedPolytope& pp) {
  switch (pp.surviving_count()) {
    case 2: return FamilyLabel::ReversedTaubNUT;
    case 3: return FamilyLabel::KerrTaubBolt;
    case 4: return FamilyLabel::ChenTeo;
    default: return FamilyLabel::Unclassified;
  }
}

}  // namespace toricflat
