#include "toricflat/polytope.hpp"

#include <algorithm>
#include <numeric>

namespace toricflat {

namespace {

// Angular half-turn of a lattice vector: 0 for the upper half-plane including
// the positive x-axis, 1 for the rest.  Together with the cross product this
// gives an exact full-circle angle order.
int half_turn(const LatticeVector& v) {
  if (v.u2 > 0 || (v.u2 == 0 && v.u1 > 0)) return 0;
  return 1;
}

// Exact "angle(a) < angle(b)" for nonzero lattice vectors, counterclockwise
// from the positive x-axis.
bool angle_less(const LatticeVector& a, const LatticeVector& b) {
  const int ha = half_turn(a), hb = half_turn(b);
  if (ha != hb) return ha < hb;
  return det(a, b) > 0;
}

Rational l_value(const Facet& f, const Vec2R& x) {
  return Rational(f.normal.u1) * x.x + Rational(f.normal.u2) * x.y - f.offset;
}

std::optional<Vec2R> corner(const Facet& a, const Facet& b) {
  const auto sol = solve2x2({Rational(a.normal.u1), Rational(a.normal.u2),
                             Rational(b.normal.u1), Rational(b.normal.u2)},
                            {a.offset, b.offset});
  if (!sol) return std::nullopt;
  return Vec2R{(*sol)[0], (*sol)[1]};
}

std::string point_to_string(const Vec2R& v) {
  return "(" + rational_to_string(v.x) + ", " + rational_to_string(v.y) + ")";
}

}  // namespace

DelzantPolygon::DelzantPolygon(std::vector<Facet> facets) : facets_(std::move(facets)) {
  const int n = facet_count();
  if (n < 3) throw PolytopeError("a polygon needs at least 3 facets, got " + std::to_string(n));
  for (const Facet& f : facets_) {
    if (f.normal.u1 == 0 && f.normal.u2 == 0) {
      throw PolytopeError("facet normal must be nonzero");
    }
  }
  canonical_.resize(static_cast<size_t>(n));
  std::iota(canonical_.begin(), canonical_.end(), 0);
  // Counterclockwise angular order of the interior normals equals the
  // counterclockwise boundary traversal; reverse it for the canonical
  // det(nu_j, nu_{j+1}) = -1 orientation.  Duplicate directions are ordered
  // deterministically and flagged by validate().
  std::stable_sort(canonical_.begin(), canonical_.end(), [&](int i, int j) {
    const auto& a = facets_[static_cast<size_t>(i)].normal;
    const auto& b = facets_[static_cast<size_t>(j)].normal;
    if (!angle_less(a, b) && !angle_less(b, a)) return i < j;  // parallel tie
    return angle_less(a, b);
  });
  std::reverse(canonical_.begin(), canonical_.end());
  const auto zero = std::find(canonical_.begin(), canonical_.end(), 0);
  std::rotate(canonical_.begin(), zero, canonical_.end());
}

ValidationReport validate(const DelzantPolygon& polygon) {
  ValidationReport report;
  const int n = polygon.facet_count();
  report.facets.resize(static_cast<size_t>(n));
  if (n < 3) {
    report.summary = "fewer than 3 facets";
    return report;
  }

  bool all_primitive = true;
  for (int i = 0; i < n; ++i) {
    auto& check = report.facets[static_cast<size_t>(i)];
    check.input_index = i;
    const auto& v = polygon.facets()[static_cast<size_t>(i)].normal;
    check.primitive = !(v.u1 == 0 && v.u2 == 0) &&
                      std::gcd(std::abs(v.u1), std::abs(v.u2)) == 1;
    if (!check.primitive) {
      check.note = "normal not primitive";
      all_primitive = false;
    }
  }

  // Adjacency and vertices in canonical traversal order; results are filed
  // under the first facet of each consecutive pair.
  bool all_unimodular = true, all_vertices = true, bounded = true;
  std::vector<std::optional<Vec2R>> verts(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    const int i = polygon.canonical_order()[static_cast<size_t>(k)];
    auto& check = report.facets[static_cast<size_t>(i)];
    const Facet& fa = polygon.canonical_facet(k);
    const Facet& fb = polygon.canonical_facet(k + 1);
    const std::int64_t d = det(fa.normal, fb.normal);
    check.unimodular_adjacent = (d == -1);
    if (d >= 0) bounded = false;  // angular gap >= half turn or duplicate direction
    if (!check.unimodular_adjacent) {
      all_unimodular = false;
      if (!check.note.empty()) check.note += "; ";
      check.note += "adjacent normal determinant " + std::to_string(d) + " (want -1)";
    }
    const auto v = corner(fa, fb);
    check.vertex_exists = v.has_value();
    if (v) {
      check.vertex = v;
      verts[static_cast<size_t>(k)] = v;
    } else {
      all_vertices = false;
      if (!check.note.empty()) check.note += "; ";
      check.note += "no vertex with next facet (parallel normals)";
    }
  }

  // Interior/feasibility: every vertex strictly inside all non-defining
  // half-planes, and consecutive vertices distinct (positive edge lengths).
  bool feasible = all_vertices;
  if (all_vertices) {
    for (int k = 0; k < n && feasible; ++k) {
      const Vec2R& v = *verts[static_cast<size_t>(k)];
      const int i = polygon.canonical_order()[static_cast<size_t>(k)];
      auto& check = report.facets[static_cast<size_t>(i)];
      for (int j = 0; j < n; ++j) {
        const int kj = polygon.canonical_order()[static_cast<size_t>(j)];
        if (j == k || j == (k + 1) % n) continue;
        if (l_value(polygon.facets()[static_cast<size_t>(kj)], v) <= 0) {
          feasible = false;
          if (!check.note.empty()) check.note += "; ";
          check.note += "vertex " + point_to_string(v) + " violates facet " +
                        std::to_string(kj);
          break;
        }
      }
      const Vec2R& prev = *verts[static_cast<size_t>((k + n - 1) % n)];
      if (feasible && prev == v) {
        feasible = false;
        if (!check.note.empty()) check.note += "; ";
        check.note += "zero-length edge at vertex " + point_to_string(v);
      }
    }
  }

  report.bounded = bounded && feasible;
  report.pass = all_primitive && all_unimodular && all_vertices && report.bounded;
  if (!report.pass) {
    for (const auto& check : report.facets) {
      if (!check.note.empty()) {
        if (!report.summary.empty()) report.summary += "; ";
        report.summary += "facet " + std::to_string(check.input_index) + ": " + check.note;
      }
    }
    if (report.summary.empty()) report.summary = "unbounded or infeasible";
  }
  return report;
}

std::vector<Vec2R> vertices(const DelzantPolygon& polygon) {
  const int n = polygon.facet_count();
  if (n < 3) throw PolytopeError("degenerate polygon: fewer than 3 facets");
  std::vector<Vec2R> out;
  out.reserve(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    const auto v = corner(polygon.canonical_facet(k), polygon.canonical_facet(k + 1));
    if (!v) throw PolytopeError("degenerate polygon: parallel adjacent normals");
    out.push_back(*v);
  }
  return out;
}

MomentSet moments(const DelzantPolygon& polygon) {
  const auto report = validate(polygon);
  if (!report.pass) throw PolytopeError("moments of invalid polygon: " + report.summary);

  // Green's theorem over the counterclockwise vertex loop: each edge P->Q
  // contributes cross = x_P y_Q - x_Q y_P times a symmetric polynomial.
  auto verts = vertices(polygon);
  std::reverse(verts.begin(), verts.end());  // canonical order is clockwise

  MomentSet m{0, 0, 0, 0, 0, 0};
  const size_t n = verts.size();
  for (size_t k = 0; k < n; ++k) {
    const Vec2R& p = verts[k];
    const Vec2R& q = verts[(k + 1) % n];
    const Rational cross = p.x * q.y - q.x * p.y;
    m.m00 += cross / 2;
    m.m10 += cross * (p.x + q.x) / 6;
    m.m01 += cross * (p.y + q.y) / 6;
    m.m20 += cross * (p.x * p.x + p.x * q.x + q.x * q.x) / 12;
    m.m11 += cross * (p.x * (2 * p.y + q.y) + q.x * (p.y + 2 * q.y)) / 24;
    m.m02 += cross * (p.y * p.y + p.y * q.y + q.y * q.y) / 12;
  }
  return m;
}

PuncturedPolytope::PuncturedPolytope(DelzantPolygon polygon, int removed_input_index)
    : polygon_(std::move(polygon)), removed_(removed_input_index) {
  const int n = polygon_.facet_count();
  if (removed_ < 0 || removed_ >= n) {
    throw PolytopeError("removed edge index out of range");
  }
  const auto report = validate(polygon_);
  if (!report.pass) {
    throw PolytopeError("punctured polytope over invalid polygon: " + report.summary);
  }
  verts_ = vertices(polygon_);
  const auto& cycle = polygon_.canonical_order();
  const auto pos = std::find(cycle.begin(), cycle.end(), removed_);
  const int p = static_cast<int>(pos - cycle.begin());
  for (int i = 1; i < n; ++i) {
    const int c = (p + i) % n;
    surviving_.push_back(cycle[static_cast<size_t>(c)]);
    vert_base_.push_back(c);
  }
}

const Facet& PuncturedPolytope::edge(int i) const {
  return polygon_.facets()[static_cast<size_t>(edge_input_index(i))];
}

int PuncturedPolytope::edge_input_index(int i) const {
  if (i < 1 || i > surviving_count()) throw PolytopeError("surviving edge index out of range");
  return surviving_[static_cast<size_t>(i - 1)];
}

std::pair<Vec2R, Vec2R> PuncturedPolytope::edge_endpoints(int i) const {
  if (i < 1 || i > surviving_count()) throw PolytopeError("surviving edge index out of range");
  const int n = polygon_.facet_count();
  const int c = vert_base_[static_cast<size_t>(i - 1)];
  return {verts_[static_cast<size_t>((c + n - 1) % n)], verts_[static_cast<size_t>(c)]};
}

Vec2R PuncturedPolytope::shared_vertex(int i) const {
  if (i < 1 || i > surviving_count() - 1) {
    throw PolytopeError("shared vertex index out of range");
  }
  return verts_[static_cast<size_t>(vert_base_[static_cast<size_t>(i - 1)])];
}

namespace {

BoundaryMoments accumulate_boundary(const std::vector<std::pair<Vec2R, Vec2R>>& edges,
                                    const std::vector<LatticeVector>& normals) {
  BoundaryMoments b{0, 0, 0};
  for (size_t k = 0; k < edges.size(); ++k) {
    const auto& [p, q] = edges[k];
    const auto& nu = normals[k];
    // Primitive tangent; the edge measure is dt in p + t*w, so an affine
    // integrand integrates to lattice_length * midpoint value.
    const Vec2R w{Rational(nu.u2), Rational(-nu.u1)};
    Rational t = dot(q - p, w) / dot(w, w);
    if (t < 0) t = -t;
    b.b0 += t;
    b.b1 += t * (p.x + q.x) / 2;
    b.b2 += t * (p.y + q.y) / 2;
  }
  return b;
}

}  // namespace

BoundaryMoments boundary_moments(const DelzantPolygon& polygon) {
  const auto report = validate(polygon);
  if (!report.pass) {
    throw PolytopeError("boundary moments of invalid polygon: " + report.summary);
  }
  const auto verts = vertices(polygon);
  const int n = polygon.facet_count();
  std::vector<std::pair<Vec2R, Vec2R>> edges;
  std::vector<LatticeVector> normals;
  for (int k = 0; k < n; ++k) {
    edges.emplace_back(verts[static_cast<size_t>((k + n - 1) % n)], verts[static_cast<size_t>(k)]);
    normals.push_back(polygon.canonical_facet(k).normal);
  }
  return accumulate_boundary(edges, normals);
}

BoundaryMoments boundary_moments(const PuncturedPolytope& pp) {
  std::vector<std::pair<Vec2R, Vec2R>> edges;
  std::vector<LatticeVector> normals;
  for (int i = 1; i <= pp.surviving_count(); ++i) {
    edges.push_back(pp.edge_endpoints(i));
    normals.push_back(pp.edge(i).normal);
  }
  return accumulate_boundary(edges, normals);
}

namespace {

AffineFunction solve_extremal(const MomentSet& m, const BoundaryMoments& b) {
  const auto sol = solve3x3({m.m00, m.m10, m.m01,
                             m.m10, m.m20, m.m11,
                             m.m01, m.m11, m.m02},
                            {b.b0, b.b1, b.b2});
  if (!sol) throw PolytopeError("singular moment system");
  return AffineFunction{(*sol)[0], (*sol)[1], (*sol)[2]};
}

}  // namespace

AffineFunction extremal_affine(const DelzantPolygon& polygon) {
  return solve_extremal(moments(polygon), boundary_moments(polygon));
}

AffineFunction extremal_affine(const PuncturedPolytope& pp) {
  return solve_extremal(moments(pp.polygon()), boundary_moments(pp));
}

std::pair<PuncturedPolytope, ExtremalData> normalize(const PuncturedPolytope& pp,
                                                     const AffineFunction& af) {
  ExtremalData data;
  data.eta = {af.a1, af.a2};
  const Rational eta_sq = dot(data.eta, data.eta);
  if (eta_sq == 0) {
    if (af.a0 != 0) {
      throw NotNormalizableError(
          "zero linear part with nonzero constant term: not normalizable");
    }
    data.scalar_flat = true;
    data.normalized = true;
    data.a0_residual = 0;
    data.translation = {0, 0};
    return {pp, data};
  }
  data.translation = (af.a0 / eta_sq) * data.eta;
  data.a0_residual = 0;
  data.normalized = true;
  PuncturedPolytope translated(translate(pp.polygon(), data.translation),
                               pp.removed_input_index());
  return {translated, data};
}

DelzantPolygon apply_map(const DelzantPolygon& polygon, const UnimodularMap& map) {
  const std::int64_t d = map.m11 * map.m22 - map.m12 * map.m21;
  if (d != 1 && d != -1) throw PolytopeError("map is not unimodular");
  // x -> Mx sends an interior normal nu to M^{-T} nu and keeps offsets:
  // <Mx, M^{-T} nu> = <x, nu>.
  std::vector<Facet> facets = polygon.facets();
  for (auto& f : facets) {
    const auto nu = f.normal;
    f.normal.u1 = d * (map.m22 * nu.u1 - map.m21 * nu.u2);
    f.normal.u2 = d * (-map.m12 * nu.u1 + map.m11 * nu.u2);
  }
  return DelzantPolygon(std::move(facets));
}

PuncturedPolytope apply_map(const PuncturedPolytope& pp, const UnimodularMap& map) {
  return PuncturedPolytope(apply_map(pp.polygon(), map), pp.removed_input_index());
}

DelzantPolygon translate(const DelzantPolygon& polygon, const Vec2R& c) {
  std::vector<Facet> facets = polygon.facets();
  for (auto& f : facets) f.offset += dot(c, to_vec2r(f.normal));
  return DelzantPolygon(std::move(facets));
}

}  // namespace toricflat
