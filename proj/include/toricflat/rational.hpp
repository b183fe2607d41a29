#pragma once

// Exact rational scalar layer.
//
// All polytope-level computation (validation, moments, the extremal affine
// solve, slope/coefficient signs) is exactly decidable over the rationals, so
// it is done in arbitrary-precision rational arithmetic and only converted to
// floating point at the boundary to the evaluation modules.  The linear
// systems at this layer are 2x2 and 3x3, solved by Cramer's rule.

#include <boost/multiprecision/cpp_int.hpp>

#include <array>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace toricflat {

using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

// 2-vector over the rationals (vertex coordinates, the extremal vector,
// translation offsets).  The operators are hidden friends on purpose: found
// only by ADL on Vec2R, they stay out of overload resolution for expressions
// over other vector types (boost 1.74's converting constructors hard-error
// when probed against Eigen expression types).
struct Vec2R {
  Rational x;
  Rational y;

  friend bool operator==(const Vec2R&, const Vec2R&) = default;

  friend Vec2R operator+(const Vec2R& a, const Vec2R& b) {
    return {a.x + b.x, a.y + b.y};
  }
  friend Vec2R operator-(const Vec2R& a, const Vec2R& b) {
    return {a.x - b.x, a.y - b.y};
  }
  friend Vec2R operator*(const Rational& s, const Vec2R& v) {
    return {s * v.x, s * v.y};
  }
};

inline Rational dot(const Vec2R& a, const Vec2R& b) { return a.x * b.x + a.y * b.y; }

// det(a, b) = a.x*b.y - a.y*b.x, the signed area spanned by (a, b).
inline Rational det(const Vec2R& a, const Vec2R& b) { return a.x * b.y - a.y * b.x; }

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// Accepts "p/q", "p", and signed variants; rejects anything else (including a
// zero denominator).
Rational parse_rational(const std::string& text);

// "p/q" when the denominator is not 1, otherwise "p".
std::string rational_to_string(const Rational& r);

// Cramer solves over the rational field; empty when the matrix is singular.
// Row-major matrices.
std::optional<std::array<Rational, 2>> solve2x2(const std::array<Rational, 4>& m,
                                                const std::array<Rational, 2>& b);
std::optional<std::array<Rational, 3>> solve3x3(const std::array<Rational, 9>& m,
                                                const std::array<Rational, 3>& b);

}  // namespace toricflat
