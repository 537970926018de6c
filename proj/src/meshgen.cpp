#include "toruscope/meshgen.hpp"

namespace toruscope {

SimplicialComplex flat_torus(int res) {
  if (res < 3) throw InputError("torus grid needs resolution at least 3");
  std::vector<std::vector<double>> verts;
  verts.reserve(res * res);
  for (int j = 0; j < res; ++j)
    for (int i = 0; i < res; ++i)
      verts.push_back({static_cast<double>(i) / res, static_cast<double>(j) / res});

  auto vid = [res](int i, int j) { return ((j % res + res) % res) * res + (i % res + res) % res; };
  std::vector<std::vector<int>> tris;
  tris.reserve(2 * res * res);
  for (int j = 0; j < res; ++j) {
    for (int i = 0; i < res; ++i) {
      int c00 = vid(i, j), c10 = vid(i + 1, j), c01 = vid(i, j + 1), c11 = vid(i + 1, j + 1);
      tris.push_back({c00, c10, c11});
      tris.push_back({c00, c11, c01});
    }
  }
  Quotient q{QuotientKind::Torus, {1.0, 1.0}};
  return SimplicialComplex(2, std::move(verts), std::move(tris), q);
}

SimplicialComplex klein_bottle(int res) {
  if (res < 3) throw InputError("Klein grid needs resolution at least 3");
  std::vector<std::vector<double>> verts;
  verts.reserve(res * res);
  for (int j = 0; j < res; ++j)
    for (int i = 0; i < res; ++i)
      verts.push_back({static_cast<double>(i) / res, static_cast<double>(j) / res});

  // Row res is row 0 with the x-axis reversed; column res wraps straight.
  auto vid = [res](int i, int j) {
    i = (i % res + res) % res;
    if (j == res) i = (res - i) % res;
    int jj = j % res;
    return jj * res + i;
  };
  std::vector<std::vector<int>> tris;
  tris.reserve(2 * res * res);
  for (int j = 0; j < res; ++j) {
    for (int i = 0; i < res; ++i) {
      int c00 = vid(i, j), c10 = vid(i + 1, j), c01 = vid(i, j + 1), c11 = vid(i + 1, j + 1);
      tris.push_back({c00, c10, c11});
      tris.push_back({c00, c11, c01});
    }
  }
  Quotient q{QuotientKind::Klein, {1.0, 1.0}};
  return SimplicialComplex(2, std::move(verts), std::move(tris), q);
}

SimplicialComplex octahedron() {
  std::vector<std::vector<double>> verts = {
      {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1},
  };
  std::vector<std::vector<int>> tris;
  for (int sx : {1, -1}) {
    for (int sy : {1, -1}) {
      for (int sz : {1, -1}) {
        int a = sx > 0 ? 0 : 1;
        int b = sy > 0 ? 2 : 3;
        int c = sz > 0 ? 4 : 5;
        // outward orientation: flip a pair when the sign product is negative
        if (sx * sy * sz > 0)
          tris.push_back({a, b, c});
        else
          tris.push_back({a, c, b});
      }
    }
  }
  return SimplicialComplex(2, std::move(verts), std::move(tris));
}

RealCochain coordinate_cochain(const SimplicialComplex& m, int axis) {
  if (axis < 0 || axis >= m.ambient_dim()) throw InputError("coordinate axis out of range");
  RealCochain c;
  c.degree = 1;
  c.values.reserve(m.edges().size());
  for (const auto& e : m.edges()) c.values.push_back(m.displacement(e[0], e[1])[axis]);
  return c;
}

RealCochain vertex_cochain(const SimplicialComplex& m,
                           const std::function<double(const std::vector<double>&)>& fn) {
  RealCochain c;
  c.degree = 0;
  c.values.reserve(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) c.values.push_back(fn(m.vertex(v)));
  return c;
}

}  // namespace toruscope
