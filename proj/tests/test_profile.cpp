#include "toricflat/fixtures.hpp"
#include "toricflat/profile.hpp"

#include <doctest.h>

#include <numeric>
#include <random>
#include <vector>

using namespace toricflat;

namespace {

struct NormalizedFixture {
  PuncturedPolytope pp;
  Vec2R eta;
};

NormalizedFixture normalized_fixture(const std::string& name) {
  const PuncturedPolytope pp = load_fixture(name);
  auto [npp, data] = normalize(pp, extremal_affine(pp));
  return {std::move(npp), data.eta};
}

UnimodularMap random_unimodular(std::mt19937_64& rng) {
  UnimodularMap m;
  std::uniform_int_distribution<int> shear(-2, 2);
  std::uniform_int_distribution<int> pick(0, 2);
  for (int step = 0; step < 4; ++step) {
    const int choice = pick(rng);
    const std::int64_t s = shear(rng);
    UnimodularMap g;
    if (choice == 0) {
      g = {1, s, 0, 1};
    } else if (choice == 1) {
      g = {1, 0, s, 1};
    } else {
      g = {0, -1, 1, 0};
    }
    m = UnimodularMap{g.m11 * m.m11 + g.m12 * m.m21, g.m11 * m.m12 + g.m12 * m.m22,
                      g.m21 * m.m11 + g.m22 * m.m21, g.m21 * m.m12 + g.m22 * m.m22};
  }
  return m;
}

}  // namespace

TEST_SUITE("profile") {

TEST_CASE("edge slopes and kink coefficients are exact on the fixtures") {
  const auto rat = [](long p, long q) { return Rational(p) / q; };

  {
    const auto [pp, eta] = normalized_fixture("cp2-minus-edge");
    const auto slopes = edge_slopes(eta, pp);
    REQUIRE(slopes.size() == 2);
    CHECK(slopes[0] == -12);
    CHECK(slopes[1] == 12);
    const ProfileCoefficients c = profile_coefficients(eta, pp);
    REQUIRE(c.a.size() == 1);
    CHECK(c.a[0] == 12);
    CHECK(c.B == 0);
  }
  {
    const auto [pp, eta] = normalized_fixture("h1-minus-edge-a");
    const auto slopes = edge_slopes(eta, pp);
    REQUIRE(slopes.size() == 3);
    CHECK(slopes[0] == rat(-84, 13));
    CHECK(slopes[1] == 0);  // exact perpendicular middle edge
    CHECK(slopes[2] == rat(84, 13));
    const ProfileCoefficients c = profile_coefficients(eta, pp);
    REQUIRE(c.a.size() == 2);
    CHECK(c.a[0] == rat(42, 13));
    CHECK(c.a[1] == rat(42, 13));
    CHECK(c.B == 0);
  }
  {
    const auto [pp, eta] = normalized_fixture("h1-minus-edge-b");
    const ProfileCoefficients c = profile_coefficients(eta, pp);
    REQUIRE(c.a.size() == 2);
    CHECK(c.a[0] == rat(36, 13));
    CHECK(c.a[1] == rat(36, 13));
    CHECK(c.B == 0);
  }
  {
    const auto [pp, eta] = normalized_fixture("pentagon-minus-edge");
    const auto slopes = edge_slopes(eta, pp);
    REQUIRE(slopes.size() == 4);
    CHECK(slopes[0] == rat(-17256, 12679));
    CHECK(slopes[1] == rat(2376, 12679));
    CHECK(slopes[2] == rat(48, 31));
    CHECK(slopes[3] == rat(17256, 12679));
    const ProfileCoefficients c = profile_coefficients(eta, pp);
    REQUIRE(c.a.size() == 3);
    CHECK(c.a[0] == rat(24, 31));
    CHECK(c.a[1] == rat(8628, 12679));
    CHECK(c.a[2] == rat(-1188, 12679));  // genuinely negative: not admissible
    CHECK(c.B == 0);
  }
}

TEST_CASE("coefficients telescope back to the end slopes, exactly") {
  for (const std::string& name : fixture_names()) {
    const auto [pp, eta] = normalized_fixture(name);
    const auto slopes = edge_slopes(eta, pp);
    const ProfileCoefficients c = profile_coefficients(eta, pp);
    const Rational total = std::accumulate(c.a.begin(), c.a.end(), Rational(0));
    CHECK(c.B - total == slopes.front());
    CHECK(c.B + total == slopes.back());
    // Partial sums reproduce every intermediate slope.
    Rational running = c.B - total;
    for (size_t j = 0; j < c.a.size(); ++j) {
      running += 2 * c.a[j];
      CHECK(running == slopes[j + 1]);
    }
  }
}

TEST_CASE("nonzero end slopes force zero drift") {
  // B = (s_1 + s_d)/2 by the telescoping identities; when the vanishing case
  // is AlongD (both end slopes nonzero) the fixtures all give B = 0 exactly.
  for (const std::string& name : fixture_names()) {
    const auto [pp, eta] = normalized_fixture(name);
    const auto slopes = edge_slopes(eta, pp);
    const VanishingCase vc = scal_vanishing_case(eta, pp);
    REQUIRE(vc.kind == VanishingCase::Kind::AlongD);
    CHECK(slopes.front() != 0);
    CHECK(slopes.back() != 0);
    CHECK(profile_coefficients(eta, pp).B == 0);
    CHECK(slopes.front() + slopes.back() == 0);
  }
}

TEST_CASE("slopes and coefficients are unimodular invariants") {
  std::mt19937_64 rng(404);
  for (const std::string& name : fixture_names()) {
    const PuncturedPolytope base = load_fixture(name);
    const auto [npp, data] = normalize(base, extremal_affine(base));
    const auto base_slopes = edge_slopes(data.eta, npp);
    const ProfileCoefficients base_coeffs = profile_coefficients(data.eta, npp);
    for (int trial = 0; trial < 10; ++trial) {
      const PuncturedPolytope image = apply_map(base, random_unimodular(rng));
      const auto [nimage, idata] = normalize(image, extremal_affine(image));
      const auto slopes = edge_slopes(idata.eta, nimage);
      const ProfileCoefficients coeffs = profile_coefficients(idata.eta, nimage);
      CHECK(slopes == base_slopes);
      CHECK(coeffs.a == base_coeffs.a);
      CHECK(coeffs.B == base_coeffs.B);
    }
  }
}

TEST_CASE("translation does not change the derived profile data") {
  const PuncturedPolytope base = load_fixture("h1-minus-edge-a");
  const auto [npp, data] = normalize(base, extremal_affine(base));
  const DelzantPolygon moved =
      translate(base.polygon(), {Rational(5) / 3, Rational(-7) / 4});
  const PuncturedPolytope moved_pp(moved, base.removed_input_index());
  const auto [nmoved, mdata] = normalize(moved_pp, extremal_affine(moved_pp));
  CHECK(mdata.eta == data.eta);
  CHECK(edge_slopes(mdata.eta, nmoved) == edge_slopes(data.eta, npp));
  const ProfileCoefficients a = profile_coefficients(data.eta, npp);
  const ProfileCoefficients b = profile_coefficients(mdata.eta, nmoved);
  CHECK(a.a == b.a);
  CHECK(a.B == b.B);
}

TEST_CASE("profile evaluation and segment slopes") {
  const BoundaryProfile p = build_profile<double>(0.5, 0.0, {1.0, 2.0}, {-1.0, 1.0});
  CHECK(p.f(-1.0) == doctest::Approx(0.5 + 4.0).epsilon(1e-15));
  CHECK(p.f(0.0) == doctest::Approx(0.5 + 1.0 + 2.0).epsilon(1e-15));
  CHECK(p.f(2.0) == doctest::Approx(0.5 + 3.0 + 2.0).epsilon(1e-15));
  CHECK(p.segment_slope(0) == doctest::Approx(-3.0));
  CHECK(p.segment_slope(1) == doctest::Approx(-1.0));
  CHECK(p.segment_slope(2) == doctest::Approx(3.0));
}

TEST_CASE("build_profile rejects malformed node lists") {
  CHECK_THROWS_AS(build_profile<double>(1.0, 0.0, {1.0, 1.0}, {0.0, 0.0}), ProfileError);
  CHECK_THROWS_AS(build_profile<double>(1.0, 0.0, {1.0, 1.0}, {1.0, 0.0}), ProfileError);
  CHECK_THROWS_AS(build_profile<double>(1.0, 0.0, {1.0}, {0.0, 1.0}), ProfileError);
  CHECK_NOTHROW(build_profile<double>(1.0, 0.0, {}, {}));
}

TEST_CASE("admissibility reports every failure reason") {
  const auto has_reason = [](const AdmissibilityReport& r, const std::string& reason) {
    return std::find(r.reasons.begin(), r.reasons.end(), reason) != r.reasons.end();
  };

  {
    const BoundaryProfile good = build_profile<double>(0.5, 0.0, {12.0}, {0.0});
    const AdmissibilityReport r = admissibility(good);
    CHECK(r.admissible);
    CHECK(r.reasons.empty());
  }
  {
    const BoundaryProfile bad_A = build_profile<double>(-0.5, 0.0, {1.0}, {0.0});
    const AdmissibilityReport r = admissibility(bad_A);
    CHECK_FALSE(r.admissible);
    CHECK_FALSE(r.positive_A);
    CHECK(has_reason(r, "NonPositiveA"));
  }
  {
    const BoundaryProfile bad_a = build_profile<double>(0.5, 0.0, {1.0, -0.25}, {0.0, 1.0});
    const AdmissibilityReport r = admissibility(bad_a);
    CHECK_FALSE(r.admissible);
    CHECK_FALSE(r.positive_coefficients);
    CHECK(has_reason(r, "NonPositiveKinkCoefficient"));
  }
  {
    const BoundaryProfile drift = build_profile<double>(0.5, 0.3, {1.0}, {0.0});
    const AdmissibilityReport r = admissibility(drift);
    CHECK_FALSE(r.admissible);
    CHECK_FALSE(r.zero_drift);
    CHECK(has_reason(r, "NonALFSlope"));
  }
  {
    // f(0) = A - a_2 * 1 = 0.5 - 1 < 0 while A > 0: the profile dips negative.
    const BoundaryProfile dips = build_profile<double>(0.5, 0.0, {2.0, -1.0}, {0.0, 1.0});
    const AdmissibilityReport r = admissibility(dips);
    CHECK_FALSE(r.admissible);
    CHECK_FALSE(r.positive_profile);
    CHECK(has_reason(r, "NonPositiveProfile"));
  }
}

TEST_CASE("fixture-derived profiles are admissible except the pentagon") {
  for (const std::string& name : fixture_names()) {
    const auto [pp, eta] = normalized_fixture(name);
    const ProfileCoefficients c = profile_coefficients(eta, pp);
    std::vector<double> coeffs;
    for (const Rational& a : c.a) coeffs.push_back(to_double(a));
    std::vector<double> nodes;
    for (size_t i = 0; i < coeffs.size(); ++i) nodes.push_back(static_cast<double>(i));
    const BoundaryProfile profile =
        build_profile<double>(0.5, to_double(c.B), coeffs, nodes);
    const AdmissibilityReport r = admissibility(profile);
    if (name == "pentagon-minus-edge") {
      CHECK_FALSE(r.admissible);
      CHECK_FALSE(r.positive_coefficients);
    } else {
      CHECK(r.admissible);
    }
  }
}

TEST_CASE("vanishing locus case split") {
  const auto [cp2, eta] = normalized_fixture("cp2-minus-edge");
  CHECK(scal_vanishing_case(eta, cp2).kind == VanishingCase::Kind::AlongD);

  // Synthetic directions exercise the other branches: eta parallel to one end
  // normal vanishes at that end's vertex; parallel ends let it vanish nowhere.
  const VanishingCase at_first = scal_vanishing_case({Rational(0), Rational(1)}, cp2);
  CHECK(at_first.kind == VanishingCase::Kind::AtVertex);
  CHECK(at_first.end == 1);
  const VanishingCase at_last = scal_vanishing_case({Rational(1), Rational(0)}, cp2);
  CHECK(at_last.kind == VanishingCase::Kind::AtVertex);
  CHECK(at_last.end == 2);

  const DelzantPolygon h1(
      {{{1, 0}, 0}, {{0, 1}, 0}, {{0, -1}, -1}, {{-1, -1}, -2}});
  const PuncturedPolytope minus_slant(h1, 3);
  REQUIRE_FALSE(minus_slant.is_compact_edge(1));
  REQUIRE(minus_slant.edge(1).normal.u1 == 0);  // end normals are (0, +-1)
  REQUIRE(minus_slant.edge(3).normal.u1 == 0);
  const VanishingCase nowhere =
      scal_vanishing_case({Rational(0), Rational(3)}, minus_slant);
  CHECK(nowhere.kind == VanishingCase::Kind::Nowhere);

  CHECK(to_string(at_first) == "AtVertex(1)");
  CHECK(to_string(nowhere) == "Nowhere");
  CHECK(to_string(scal_vanishing_case(eta, cp2)) == "AlongD");
}

TEST_CASE("family classification by surviving edge count") {
  CHECK(classify_family(load_fixture("cp2-minus-edge")) == FamilyLabel::ReversedTaubNUT);
  CHECK(classify_family(load_fixture("h1-minus-edge-a")) == FamilyLabel::KerrTaubBolt);
  CHECK(classify_family(load_fixture("h1-minus-edge-b")) == FamilyLabel::KerrTaubBolt);
  CHECK(classify_family(load_fixture("pentagon-minus-edge")) == FamilyLabel::ChenTeo);

  // Six facets leave five surviving edges: beyond the named families.
  const DelzantPolygon hexagon({{{1, 0}, -1},
                                {{1, 1}, -1},
                                {{0, 1}, -1},
                                {{-1, 0}, -1},
                                {{-1, -1}, -1},
                                {{0, -1}, -1}});
  REQUIRE(validate(hexagon).pass);
  CHECK(classify_family(PuncturedPolytope(hexagon, 0)) == FamilyLabel::Unclassified);

  CHECK(to_string(FamilyLabel::ReversedTaubNUT) == "ReversedTaubNUT");
  CHECK(to_string(FamilyLabel::KerrTaubBolt) == "KerrTaubBolt");
  CHECK(to_string(FamilyLabel::ChenTeo) == "ChenTeo");
  CHECK(to_string(FamilyLabel::Unclassified) == "Unclassified");
}

}  // TEST_SUITE
