#include "toruscope/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <queue>
#include <sstream>

namespace toruscope {

namespace {

std::vector<int> sorted_tuple(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// Parity of the permutation taking `stored` to ascending order.
int permutation_parity(const std::vector<int>& stored) {
  int inversions = 0;
  for (size_t i = 0; i < stored.size(); ++i)
    for (size_t j = i + 1; j < stored.size(); ++j)
      if (stored[i] > stored[j]) ++inversions;
  return inversions % 2 == 0 ? 1 : -1;
}

void enumerate_subsets(const std::vector<int>& tuple, int size,
                       const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> pick(size);
  std::vector<int> idx(size);
  std::iota(idx.begin(), idx.end(), 0);
  const int total = static_cast<int>(tuple.size());
  for (;;) {
    for (int i = 0; i < size; ++i) pick[i] = tuple[idx[i]];
    fn(pick);
    int i = size - 1;
    while (i >= 0 && idx[i] == total - size + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
  }
}

double wrap_period(double x, double period) {
  double r = std::remainder(x, period);
  if (r <= -period / 2) r += period;
  return r;
}

}  // namespace

SimplicialComplex::SimplicialComplex(int dimension, std::vector<std::vector<double>> vertices,
                                     std::vector<std::vector<int>> top_simplices,
                                     Quotient quotient)
    : n_(dimension), vertices_(std::move(vertices)), tops_(std::move(top_simplices)),
      quotient_(std::move(quotient)) {
  if (n_ < 1) throw InputError("complex dimension must be at least 1");
  if (vertices_.empty()) throw InputError("complex has no vertices");
  d_ = static_cast<int>(vertices_[0].size());
  if (d_ < n_) throw InputError("ambient dimension below complex dimension");
  for (const auto& v : vertices_)
    if (static_cast<int>(v.size()) != d_) throw InputError("inconsistent vertex coordinate sizes");
  if (quotient_.kind != QuotientKind::None) {
    if (static_cast<int>(quotient_.periods.size()) != d_)
      throw InputError("quotient periods must match ambient dimension");
    for (double p : quotient_.periods)
      if (!(p > 0)) throw InputError("quotient periods must be positive");
    if (quotient_.kind == QuotientKind::Klein && d_ != 2)
      throw InputError("Klein identification requires two coordinates");
  }

  const int nv = num_vertices();
  for (auto& t : tops_) {
    if (static_cast<int>(t.size()) != n_ + 1)
      throw InputError("top simplex arity does not match dimension");
    for (int v : t)
      if (v < 0 || v >= nv) throw InputError("top simplex vertex index out of range");
    auto s = sorted_tuple(t);
    if (std::adjacent_find(s.begin(), s.end()) != s.end())
      throw InputError("top simplex repeats a vertex");
  }
  std::sort(tops_.begin(), tops_.end(), [](const auto& a, const auto& b) {
    return sorted_tuple(a) < sorted_tuple(b);
  });
  for (size_t i = 0; i + 1 < tops_.size(); ++i)
    if (sorted_tuple(tops_[i]) == sorted_tuple(tops_[i + 1]))
      throw InputError("duplicate top simplex");

  top_sign_.reserve(tops_.size());
  for (const auto& t : tops_) top_sign_.push_back(permutation_parity(t));

  build_skeletons();
  validate_geometry();
  compute_flags();
}

void SimplicialComplex::build_skeletons() {
  skeleton_.assign(n_ + 1, {});
  skeleton_map_.assign(n_ + 1, {});
  for (int v = 0; v < num_vertices(); ++v) skeleton_[0].push_back({v});
  for (int p = 1; p <= n_; ++p) {
    std::vector<std::vector<int>> found;
    for (const auto& t : tops_) {
      auto s = sorted_tuple(t);
      enumerate_subsets(s, p + 1, [&](const std::vector<int>& face) { found.push_back(face); });
    }
    std::sort(found.begin(), found.end());
    found.erase(std::unique(found.begin(), found.end()), found.end());
    skeleton_[p] = std::move(found);
  }
  for (int p = 0; p <= n_; ++p)
    for (size_t i = 0; i < skeleton_[p].size(); ++i)
      skeleton_map_[p][skeleton_[p][i]] = static_cast<int>(i);

  edges_.clear();
  edges_.reserve(skeleton_[1].size());
  for (const auto& e : skeleton_[1]) edges_.push_back({e[0], e[1]});
}

void SimplicialComplex::validate_geometry() {
  for (int t = 0; t < num_tops(); ++t) {
    Eigen::MatrixXd e = edge_vectors(t);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(e);
    double smax = svd.singularValues()(0);
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (!(smax > 0) || smin <= 1e-12 * smax) {
      std::ostringstream os;
      os << "degenerate top simplex " << t << " (edge vectors do not span)";
      throw InputError(os.str());
    }
  }
}

void SimplicialComplex::compute_flags() {
  // Ridge incidence with induced boundary signs.
  std::map<std::vector<int>, std::vector<int>> ridge_signs;
  for (int t = 0; t < num_tops(); ++t) {
    const auto& stored = tops_[t];
    for (int i = 0; i <= n_; ++i) {
      std::vector<int> face;
      face.reserve(n_);
      for (int j = 0; j <= n_; ++j)
        if (j != i) face.push_back(stored[j]);
      int sign = (i % 2 == 0 ? 1 : -1) * permutation_parity(face);
      ridge_signs[sorted_tuple(face)].push_back(sign);
    }
  }
  validation_.closed_manifold = true;
  validation_.oriented = true;
  for (const auto& [face, signs] : ridge_signs) {
    if (signs.size() != 2) validation_.closed_manifold = false;
    int sum = std::accumulate(signs.begin(), signs.end(), 0);
    if (signs.size() != 2 || sum != 0) validation_.oriented = false;
  }

  std::vector<char> seen(num_vertices(), 0);
  std::vector<std::vector<int>> adj(num_vertices());
  for (const auto& e : edges_) {
    adj[e[0]].push_back(e[1]);
    adj[e[1]].push_back(e[0]);
  }
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        q.push(w);
      }
    }
  }
  validation_.connected = reached == num_vertices();
}

int SimplicialComplex::num_simplices(int p) const {
  if (p < 0 || p > n_) return 0;
  return static_cast<int>(skeleton_[p].size());
}

const std::vector<std::vector<int>>& SimplicialComplex::skeleton(int p) const {
  if (p < 0 || p > n_) throw InputError("skeleton degree out of range");
  return skeleton_[p];
}

int SimplicialComplex::simplex_index(int p, std::vector<int> verts) const {
  if (p < 0 || p > n_) return -1;
  std::sort(verts.begin(), verts.end());
  auto it = skeleton_map_[p].find(verts);
  return it == skeleton_map_[p].end() ? -1 : it->second;
}

int SimplicialComplex::edge_index(int u, int v) const {
  int i = simplex_index(1, {u, v});
  if (i < 0) {
    std::ostringstream os;
    os << "no edge between vertices " << u << " and " << v;
    throw InputError(os.str());
  }
  return i;
}

std::vector<double> SimplicialComplex::displacement(int u, int v) const {
  const auto& a = vertices_[u];
  const auto& b = vertices_[v];
  std::vector<double> out(d_);
  switch (quotient_.kind) {
    case QuotientKind::None:
      for (int i = 0; i < d_; ++i) out[i] = b[i] - a[i];
      break;
    case QuotientKind::Torus:
      for (int i = 0; i < d_; ++i) out[i] = wrap_period(b[i] - a[i], quotient_.periods[i]);
      break;
    case QuotientKind::Klein: {
      const double lx = quotient_.periods[0];
      const double ly = quotient_.periods[1];
      double best = 0;
      bool have = false;
      for (int gb : {0, -1, 1}) {
        for (int ga : {0, -1, 1}) {
          double x = gb == 0 ? b[0] : lx - b[0];
          double y = b[1] + gb * ly;
          x += ga * lx;
          double dx = x - a[0];
          double dy = y - a[1];
          double norm2 = dx * dx + dy * dy;
          if (!have || norm2 < best) {
            have = true;
            best = norm2;
            out[0] = dx;
            out[1] = dy;
          }
        }
      }
      break;
    }
  }
  return out;
}

Eigen::MatrixXd SimplicialComplex::edge_vectors(int t) const {
  const auto& stored = tops_[t];
  Eigen::MatrixXd e(d_, n_);
  for (int i = 1; i <= n_; ++i) {
    auto disp = displacement(stored[0], stored[i]);
    for (int r = 0; r < d_; ++r) e(r, i - 1) = disp[r];
  }
  return e;
}

RealCochain to_real(const RatCochain& c) {
  RealCochain out;
  out.degree = c.degree;
  out.values.reserve(c.values.size());
  for (const auto& v : c.values) out.values.push_back(v.get_d());
  return out;
}

RealCochain to_real(const IntCochain& c) {
  RealCochain out;
  out.degree = c.degree;
  out.values.reserve(c.values.size());
  for (long long v : c.values) out.values.push_back(static_cast<double>(v));
  return out;
}

template <class T>
Cochain<T> coboundary(const SimplicialComplex& m, const Cochain<T>& c) {
  const int p = c.degree;
  if (p < 0 || p >= m.dimension())
    throw InputError("coboundary raises degree beyond complex dimension");
  if (static_cast<int>(c.values.size()) != m.num_simplices(p))
    throw InputError("cochain length does not match skeleton");

  Cochain<T> out;
  out.degree = p + 1;
  out.values.assign(m.num_simplices(p + 1), T(0));
  const auto& cells = m.skeleton(p + 1);
  for (size_t s = 0; s < cells.size(); ++s) {
    const auto& tuple = cells[s];  // sorted
    T sum(0);
    std::vector<int> face(tuple.size() - 1);
    for (size_t i = 0; i < tuple.size(); ++i) {
      for (size_t j = 0, o = 0; j < tuple.size(); ++j)
        if (j != i) face[o++] = tuple[j];
      int idx = m.simplex_index(p, face);
      T term = c.values[idx];
      if (i % 2 == 1) term = -term;
      sum += term;
    }
    if (p + 1 == m.dimension() && m.top_orientation(static_cast<int>(s)) < 0) sum = -sum;
    out.values[s] = sum;
  }
  return out;
}

template Cochain<long long> coboundary(const SimplicialComplex&, const Cochain<long long>&);
template Cochain<double> coboundary(const SimplicialComplex&, const Cochain<double>&);
template Cochain<Rat> coboundary(const SimplicialComplex&, const Cochain<Rat>&);

ClosednessReport verify_closed(const SimplicialComplex& m, const RealCochain& c, double tol) {
  ClosednessReport rep;
  if (c.degree >= m.dimension()) {
    rep.closed = true;  // no higher simplices to obstruct
    return rep;
  }
  RealCochain dc = coboundary(m, c);
  for (size_t i = 0; i < dc.values.size(); ++i) {
    double a = std::abs(dc.values[i]);
    if (a > rep.residual) {
      rep.residual = a;
      rep.worst_simplex = static_cast<int>(i);
    }
  }
  rep.closed = rep.residual <= tol;
  return rep;
}

Eigen::VectorXd edge_basis_components(const SimplicialComplex& m, const RealCochain& c, int t) {
  if (c.degree != 1) throw InputError("components require a 1-cochain");
  const auto& stored = m.top(t);
  const int n = m.dimension();
  Eigen::VectorXd out(n);
  for (int i = 1; i <= n; ++i) {
    int u = stored[0];
    int v = stored[i];
    int e = m.edge_index(u, v);
    double val = c.values[e];
    if (u > v) val = -val;
    out(i - 1) = val;
  }
  return out;
}

Eigen::VectorXd cartesian_components(const SimplicialComplex& m, const RealCochain& c, int t) {
  if (m.ambient_dim() != m.dimension())
    throw InputError("Cartesian components need ambient dimension equal to intrinsic");
  Eigen::MatrixXd e = m.edge_vectors(t);
  Eigen::VectorXd lambda = edge_basis_components(m, c, t);
  return e.transpose().fullPivLu().solve(lambda);
}

IndependenceReport independence_report(const SimplicialComplex& m,
                                       const std::vector<RealCochain>& forms, double tol) {
  const int k = static_cast<int>(forms.size());
  const int n = m.dimension();
  if (k == 0) throw InputError("independence check needs at least one form");
  if (k > n) throw InputError("more forms than the manifold dimension admits");

  IndependenceReport rep;
  rep.k = k;
  rep.tol = tol;
  rep.component_matrices.reserve(m.num_tops());
  rep.ranks.reserve(m.num_tops());
  rep.min_singular_value = -1.0;
  for (int t = 0; t < m.num_tops(); ++t) {
    Eigen::MatrixXd mat(k, n);
    for (int f = 0; f < k; ++f) mat.row(f) = edge_basis_components(m, forms[f], t).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(mat);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) >= tol) ++rank;
    double sk = sv(sv.size() - 1);  // k <= n, so the k-th singular value is last
    rep.component_matrices.push_back(std::move(mat));
    rep.ranks.push_back(rank);
    if (rep.min_singular_value < 0 || sk < rep.min_singular_value) {
      rep.min_singular_value = sk;
      rep.argmin_simplex = t;
    }
  }
  rep.pass = rep.min_singular_value >= tol;
  return rep;
}

}  // namespace toruscope
