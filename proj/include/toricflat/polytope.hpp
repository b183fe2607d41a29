#pragma once

// Delzant polygons and the extremal affine function.
//
// A polygon is given by interior facet normals nu_i (primitive lattice
// vectors) and rational offsets lambda_i, as the intersection of half-planes
//   l_i(x) = <x, nu_i> - lambda_i >= 0.
// Facets are stored in input order; a canonical cyclic traversal is computed
// geometrically so that consecutive facet normals satisfy
// det(nu_j, nu_{j+1}) = -1.  That sign convention is load-bearing: every
// downstream slope and kink-coefficient sign is derived from it, and it is the
// one under which the bundled examples come out admissible.  Input facet lists
// may arrive in any order or orientation.
//
// A punctured polytope removes one facet ("the removed edge"); the surviving
// edges are re-indexed E_1..E_d starting from the facet after the removed one
// in canonical traversal order, so E_1 and E_d are the two edges adjacent to
// the removed edge (the non-compact directions of the complement) and
// E_2..E_{d-1} are the compact edges.

#include "toricflat/rational.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace toricflat {

// Primitive integer facet normal.
struct LatticeVector {
  std::int64_t u1 = 0;
  std::int64_t u2 = 0;

  friend bool operator==(const LatticeVector&, const LatticeVector&) = default;
};

inline std::int64_t det(const LatticeVector& a, const LatticeVector& b) {
  return a.u1 * b.u2 - a.u2 * b.u1;
}
inline Vec2R to_vec2r(const LatticeVector& v) { return {Rational(v.u1), Rational(v.u2)}; }

// One half-plane l(x) = <x, normal> - offset >= 0.
struct Facet {
  LatticeVector normal;
  Rational offset;
};

struct PolytopeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class DelzantPolygon;

// Per-facet validation outcome.  `input_index` refers to the facet's position
// in the list the polygon was constructed from; `vertex` is the corner shared
// with the next facet in canonical traversal order, when it exists.
struct FacetCheck {
  int input_index = 0;
  bool primitive = false;
  bool vertex_exists = false;
  bool unimodular_adjacent = false;
  std::optional<Vec2R> vertex;
  std::string note;
};

struct ValidationReport {
  bool bounded = false;
  bool pass = false;
  std::vector<FacetCheck> facets;
  std::string summary;
};

class DelzantPolygon {
 public:
  DelzantPolygon() = default;
  // Accepts facets in any order; computes the canonical traversal.  Throws
  // PolytopeError only for structural impossibilities (fewer than 3 facets,
  // a zero normal); geometric defects are left for validate() to report.
  explicit DelzantPolygon(std::vector<Facet> facets);

  const std::vector<Facet>& facets() const { return facets_; }
  int facet_count() const { return static_cast<int>(facets_.size()); }

  // Input indices arranged in canonical traversal order
  // (det(nu_j, nu_{j+1}) = -1 for every consecutive pair of a valid polygon),
  // rotated to start at input index 0.
  const std::vector<int>& canonical_order() const { return canonical_; }

  const Facet& canonical_facet(int k) const {
    const int n = facet_count();
    return facets_[static_cast<size_t>(canonical_[static_cast<size_t>(((k % n) + n) % n)])];
  }

 private:
  std::vector<Facet> facets_;
  std::vector<int> canonical_;
};

// Full validation: primitivity, unimodular adjacency in canonical order,
// vertex existence, boundedness/nonempty interior.  Never throws; failures
// are report entries.
ValidationReport validate(const DelzantPolygon& polygon);

// Vertices in canonical traversal order: vertex k is the corner shared by
// canonical facets k and k+1.  Throws PolytopeError on degenerate input
// (parallel adjacent normals or an invalid polygon).
std::vector<Vec2R> vertices(const DelzantPolygon& polygon);

// Area moments of the polygon: integrals of {1, x1, x2, x1^2, x1 x2, x2^2}
// over the polygon, exact, via the boundary (Green) formulas.
struct MomentSet {
  Rational m00, m10, m01, m20, m11, m02;
};

MomentSet moments(const DelzantPolygon& polygon);

class PuncturedPolytope {
 public:
  PuncturedPolytope() = default;
  // `removed_input_index` refers to the constructing facet list.
  PuncturedPolytope(DelzantPolygon polygon, int removed_input_index);

  const DelzantPolygon& polygon() const { return polygon_; }
  int removed_input_index() const { return removed_; }

  // Number of surviving edges d (facet count minus one).
  int surviving_count() const { return polygon_.facet_count() - 1; }

  // Surviving edge i (1-based, i = 1..d) as a facet reference.
  const Facet& edge(int i) const;
  // Input index of surviving edge i.
  int edge_input_index(int i) const;
  // True for the compact edges i = 2..d-1 (both endpoints survive).
  bool is_compact_edge(int i) const { return i >= 2 && i <= surviving_count() - 1; }

  // Endpoints of surviving edge i in the polygon, ordered along the
  // canonical traversal (so consecutive edges share an endpoint).  Edge 1's
  // first endpoint and edge d's second endpoint lie on the removed edge.
  std::pair<Vec2R, Vec2R> edge_endpoints(int i) const;

  // The corner shared by surviving edges i and i+1, i = 1..d-1.  These are
  // the corners that correspond to profile kinks downstream.
  Vec2R shared_vertex(int i) const;

 private:
  DelzantPolygon polygon_;
  int removed_ = -1;
  std::vector<int> surviving_;  // input indices, canonical order from E_1
  std::vector<Vec2R> verts_;    // polygon vertices, canonical order
  std::vector<int> vert_base_;  // vertex position of canonical facet k
};

// Boundary integrals of {1, x1, x2} against the lattice measure, summed over
// the surviving edges only (every edge for a plain polygon).  On each edge the
// measure is the pullback of dt under p + t*w with w the primitive tangent
// (w = (nu2, -nu1)), so the measure of a whole edge is its lattice length.
struct BoundaryMoments {
  Rational b0, b1, b2;
};

BoundaryMoments boundary_moments(const DelzantPolygon& polygon);
BoundaryMoments boundary_moments(const PuncturedPolytope& pp);

// Affine function a0 + a1 x1 + a2 x2 with exact coefficients.
struct AffineFunction {
  Rational a0, a1, a2;
};

// Solves the 3x3 Gram system M alpha = b where M collects the area moments of
// the full polygon and b the boundary moments of the surviving edges: the
// unique affine function whose area pairing against {1, x1, x2} matches the
// boundary pairing.  Exact.  Throws PolytopeError if M is singular (impossible
// for a nondegenerate polygon, still guarded).
AffineFunction extremal_affine(const DelzantPolygon& polygon);
AffineFunction extremal_affine(const PuncturedPolytope& pp);

// The linear part of the extremal affine function, plus normalization state.
struct ExtremalData {
  Vec2R eta;                  // (a1, a2)
  Rational a0_residual;       // constant term after normalization (0 if normalized)
  bool normalized = false;
  bool scalar_flat = false;   // eta = 0 with zero constant term
  Vec2R translation;          // applied polygon translation
};

struct NotNormalizableError : PolytopeError {
  using PolytopeError::PolytopeError;
};

// Translates the polytope by c = a0 * eta / |eta|^2 — the unique translation
// parallel to eta that kills the constant term — and returns the translated
// polytope with the extremal data.  After translation the recomputed extremal
// affine function has zero constant term (asserted exactly in tests).
// Throws NotNormalizableError when eta = 0 with a0 != 0 (constant nonzero
// scalar curvature: the ansatz downstream does not apply); eta = 0 with
// a0 = 0 sets the scalar_flat flag instead.
std::pair<PuncturedPolytope, ExtremalData> normalize(const PuncturedPolytope& pp,
                                                     const AffineFunction& af);

// x -> M x maps normals by the inverse transpose and offsets stay fixed;
// used by the equivariance tests and accepted from the CLI for experiments.
struct UnimodularMap {
  std::int64_t m11 = 1, m12 = 0, m21 = 0, m22 = 1;  // row-major, |det| = 1
};

DelzantPolygon apply_map(const DelzantPolygon& polygon, const UnimodularMap& map);
PuncturedPolytope apply_map(const PuncturedPolytope& pp, const UnimodularMap& map);
DelzantPolygon translate(const DelzantPolygon& polygon, const Vec2R& c);

}  // namespace toricflat
