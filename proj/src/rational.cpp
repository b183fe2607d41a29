#include "toricflat/rational.hpp"

#include <cctype>

namespace toricflat {

Rational parse_rational(const std::string& text) {
  // Shape check first: boost's stream operator accepts some forms we do not
  // want to admit silently (e.g. trailing junk after a valid prefix).
  const auto is_int = [](const std::string& s) {
    if (s.empty()) return false;
    size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    return true;
  };

  const auto slash = text.find('/');
  if (slash == std::string::npos) {
    if (!is_int(text)) throw std::invalid_argument("not a rational: '" + text + "'");
    return Rational(Integer(text));
  }
  const std::string num = text.substr(0, slash);
  const std::string den = text.substr(slash + 1);
  if (!is_int(num) || !is_int(den)) {
    throw std::invalid_argument("not a rational: '" + text + "'");
  }
  Integer d(den);
  if (d == 0) throw std::invalid_argument("zero denominator: '" + text + "'");
  return Rational(Integer(num), d);
}

std::string rational_to_string(const Rational& r) {
  std::ostringstream os;
  os << r;  // prints "p/q", or "p" when the denominator is 1
  return os.str();
}

std::optional<std::array<Rational, 2>> solve2x2(const std::array<Rational, 4>& m,
                                                const std::array<Rational, 2>& b) {
  const Rational d = m[0] * m[3] - m[1] * m[2];
  if (d == 0) return std::nullopt;
  return std::array<Rational, 2>{(b[0] * m[3] - m[1] * b[1]) / d,
                                 (m[0] * b[1] - b[0] * m[2]) / d};
}

namespace {
Rational det3(const std::array<Rational, 9>& a) {
  return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
         a[2] * (a[3] * a[7] - a[4] * a[6]);
}
}  // namespace

std::optional<std::array<Rational, 3>> solve3x3(const std::array<Rational, 9>& m,
                                                const std::array<Rational, 3>& b) {
  const Rational d = det3(m);
  if (d == 0) return std::nullopt;
  std::array<Rational, 3> x;
  for (int c = 0; c < 3; ++c) {
    std::array<Rational, 9> mc = m;
    for (int r = 0; r < 3; ++r) mc[static_cast<size_t>(3 * r + c)] = b[static_cast<size_t>(r)];
    x[static_cast<size_t>(c)] = det3(mc) / d;
  }
  return x;
}

}  // namespace toricflat
