#pragma once

// Bundled punctured polytopes, one per known family target (the second
// Taub-bolt entry removes a different edge of the same polygon).  The same
// data ships as JSON files under fixtures/ for use with --input; a test pins
// the two copies to each other.

#include "toricflat/io.hpp"
#include "toricflat/polytope.hpp"

#include <string>
#include <vector>

namespace toricflat {

std::vector<std::string> fixture_names();
bool is_fixture_name(const std::string& name);

// Throws IoError on an unknown name.
PuncturedPolytope load_fixture(const std::string& name);

// The fixture in the polytope-file JSON shape ({"facets": ..., "removed": n}).
Json fixture_json(const std::string& name);

}  // namespace toricflat
