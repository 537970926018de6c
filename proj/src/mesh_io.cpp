#include "toruscope/mesh_io.hpp"

#include <fstream>
#include <iostream>

#include "toruscope/errors.hpp"

namespace toruscope {

json mesh_to_json(const SimplicialComplex& m) {
  json doc;
  doc["dimension"] = m.dimension();
  json verts = json::array();
  for (int v = 0; v < m.num_vertices(); ++v) {
    json row = json::array();
    for (double x : m.vertex(v)) row.push_back(x);
    verts.push_back(std::move(row));
  }
  doc["vertices"] = std::move(verts);
  json tops = json::array();
  for (int t = 0; t < m.num_tops(); ++t) {
    json row = json::array();
    for (int v : m.top(t)) row.push_back(v);
    tops.push_back(std::move(row));
  }
  doc["simplices"] = std::move(tops);
  if (m.quotient().kind != QuotientKind::None) {
    json topo;
    topo["kind"] = m.quotient().kind == QuotientKind::Torus ? "torus" : "klein";
    topo["periods"] = m.quotient().periods;
    doc["topology"] = std::move(topo);
  }
  return doc;
}

namespace {

const json& require_field(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) throw InputError(std::string("mesh document missing field \"") + key + "\"");
  return *it;
}

}  // namespace

SimplicialComplex mesh_from_json(const json& doc) {
  if (!doc.is_object()) throw InputError("mesh document must be a JSON object");
  const json& jd = require_field(doc, "dimension");
  if (!jd.is_number_integer()) throw InputError("\"dimension\" must be an integer");
  int n = jd.get<int>();

  const json& jv = require_field(doc, "vertices");
  if (!jv.is_array()) throw InputError("\"vertices\" must be an array");
  std::vector<std::vector<double>> vertices;
  vertices.reserve(jv.size());
  for (const json& row : jv) {
    if (!row.is_array()) throw InputError("each vertex must be an array of coordinates");
    std::vector<double> coords;
    coords.reserve(row.size());
    for (const json& x : row) {
      if (!x.is_number()) throw InputError("vertex coordinates must be numbers");
      coords.push_back(x.get<double>());
    }
    vertices.push_back(std::move(coords));
  }

  const json& js = require_field(doc, "simplices");
  if (!js.is_array()) throw InputError("\"simplices\" must be an array");
  std::vector<std::vector<int>> tops;
  tops.reserve(js.size());
  for (const json& row : js) {
    if (!row.is_array()) throw InputError("each simplex must be an array of vertex indices");
    std::vector<int> verts;
    verts.reserve(row.size());
    for (const json& x : row) {
      if (!x.is_number_integer()) throw InputError("simplex entries must be integer vertex indices");
      verts.push_back(x.get<int>());
    }
    tops.push_back(std::move(verts));
  }

  Quotient q;
  if (auto it = doc.find("topology"); it != doc.end()) {
    const json& topo = *it;
    if (!topo.is_object()) throw InputError("\"topology\" must be an object");
    std::string kind = require_field(topo, "kind").get<std::string>();
    if (kind == "torus") q.kind = QuotientKind::Torus;
    else if (kind == "klein") q.kind = QuotientKind::Klein;
    else throw InputError("unknown topology kind \"" + kind + "\"");
    const json& jp = require_field(topo, "periods");
    if (!jp.is_array()) throw InputError("\"periods\" must be an array");
    for (const json& x : jp) q.periods.push_back(x.get<double>());
  }

  return SimplicialComplex(n, std::move(vertices), std::move(tops), q);
}

json cochain_to_json(const IntCochain& c) {
  json doc;
  doc["degree"] = c.degree;
  doc["values"] = c.values;
  return doc;
}

json cochain_to_json(const RealCochain& c) {
  json doc;
  doc["degree"] = c.degree;
  json vals = json::array();
  for (double x : c.values) vals.push_back(x);
  doc["values"] = std::move(vals);
  return doc;
}

LoadedCochain cochain_from_json(const json& doc) {
  if (!doc.is_object()) throw InputError("cochain document must be a JSON object");
  const json& jd = require_field(doc, "degree");
  if (!jd.is_number_integer()) throw InputError("\"degree\" must be an integer");
  const json& jv = require_field(doc, "values");
  if (!jv.is_array()) throw InputError("\"values\" must be an array");

  LoadedCochain out;
  int degree = jd.get<int>();
  if (degree < 0) throw InputError("\"degree\" must be nonnegative");
  out.integral = true;
  for (const json& x : jv) {
    if (!x.is_number_integer()) { out.integral = false; break; }
  }
  if (out.integral) {
    out.iv.degree = degree;
    out.iv.values.reserve(jv.size());
    for (const json& x : jv) out.iv.values.push_back(x.get<long long>());
  } else {
    out.rv.degree = degree;
    out.rv.values.reserve(jv.size());
    for (const json& x : jv) {
      if (!x.is_number()) throw InputError("cochain values must be numbers");
      out.rv.values.push_back(x.get<double>());
    }
  }
  return out;
}

json load_json_file(const std::string& path) {
  json doc;
  try {
    if (path == "-") {
      doc = json::parse(std::cin);
    } else {
      std::ifstream in(path);
      if (!in) throw InputError("cannot open \"" + path + "\" for reading");
      doc = json::parse(in);
    }
  } catch (const json::parse_error& e) {
    throw InputError(std::string("JSON parse error in \"") + path + "\": " + e.what());
  }
  return doc;
}

void write_text_file(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot open \"" + path + "\" for writing");
  out << text;
  if (!out) throw InputError("write to \"" + path + "\" failed");
}

}  // namespace toruscope
