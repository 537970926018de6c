#pragma once

#include <json.hpp>

#include <string>

#include "toruscope/mesh.hpp"

namespace toruscope {

using json = nlohmann::ordered_json;

json mesh_to_json(const SimplicialComplex& m);
SimplicialComplex mesh_from_json(const json& doc);

/// Cochain documents keep integer values as JSON integers so that integer
/// data round-trips bit-exactly; floating values use shortest round-trip
/// decimal form.
json cochain_to_json(const IntCochain& c);
json cochain_to_json(const RealCochain& c);

struct LoadedCochain {
  bool integral = false;
  IntCochain iv;
  RealCochain rv;

  RealCochain as_real() const { return integral ? to_real(iv) : rv; }
};

LoadedCochain cochain_from_json(const json& doc);

json load_json_file(const std::string& path);       // "-" reads stdin
void write_text_file(const std::string& path, const std::string& text);  // "-" writes stdout

}  // namespace toruscope
