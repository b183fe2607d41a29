#include "toricflat/fixtures.hpp"

#include <algorithm>

namespace toricflat {

namespace {

struct FixtureDef {
  const char* name;
  std::vector<Facet> facets;
  int removed;  // input index of the removed edge
};

const std::vector<FixtureDef>& table() {
  static const std::vector<FixtureDef> defs = {
      {"cp2-minus-edge",
       {{{1, 0}, 0}, {{0, 1}, 0}, {{-1, -1}, -1}},
       2},
      {"h1-minus-edge-a",
       {{{1, 0}, 0}, {{0, 1}, 0}, {{0, -1}, -1}, {{-1, -1}, -2}},
       2},
      {"h1-minus-edge-b",
       {{{1, 0}, 0}, {{0, 1}, 0}, {{0, -1}, -1}, {{-1, -1}, -2}},
       1},
      {"pentagon-minus-edge",
       {{{1, 0}, 0}, {{0, 1}, 0}, {{0, -1}, -2}, {{-1, 0}, -2}, {{-1, -1}, -3}},
       1},
  };
  return defs;
}

const FixtureDef& find(const std::string& name) {
  const auto it = std::ranges::find_if(
      table(), [&](const FixtureDef& def) { return name == def.name; });
  if (it == table().end()) throw IoError("unknown fixture: " + name);
  return *it;
}

}  // namespace

std::vector<std::string> fixture_names() {
  std::vector<std::string> names;
  for (const FixtureDef& def : table()) names.emplace_back(def.name);
  return names;
}

bool is_fixture_name(const std::string& name) {
  return std::ranges::any_of(table(),
                             [&](const FixtureDef& def) { return name == def.name; });
}

PuncturedPolytope load_fixture(const std::string& name) {
  const FixtureDef& def = find(name);
  return PuncturedPolytope(DelzantPolygon(def.facets), def.removed);
}

Json fixture_json(const std::string& name) {
  const FixtureDef& def = find(name);
  return polytope_to_json(DelzantPolygon(def.facets), def.removed);
}

}  // namespace toricflat
