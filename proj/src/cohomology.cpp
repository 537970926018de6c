#include "toruscope/cohomology.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include "toruscope/errors.hpp"

namespace toruscope {

CycleBasis cycle_basis(const SimplicialComplex& m) {
  int nv = m.num_vertices();
  const auto& edges = m.edges();

  // Adjacency lists in canonical edge order, so BFS tie-breaking is fixed.
  std::vector<std::vector<std::pair<int, int>>> adj(nv);
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    adj[edges[e][0]].push_back({edges[e][1], e});
    adj[edges[e][1]].push_back({edges[e][0], e});
  }

  CycleBasis basis;
  basis.parent.assign(nv, -1);
  basis.parent_edge.assign(nv, -1);
  std::vector<int> depth(nv, -1);
  std::vector<char> in_tree(edges.size(), 0);

  std::queue<int> q;
  q.push(0);
  depth[0] = 0;
  basis.order.push_back(0);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (auto [v, e] : adj[u]) {
      if (depth[v] >= 0) continue;
      depth[v] = depth[u] + 1;
      basis.parent[v] = u;
      basis.parent_edge[v] = e;
      in_tree[e] = 1;
      basis.order.push_back(v);
      q.push(v);
    }
  }
  if (static_cast<int>(basis.order.size()) != nv)
    throw InputError("mesh is not connected");

  // One step from child c to its parent, signed against the canonical edge
  // orientation (low vertex to high vertex).
  auto step_up = [&](int c) -> std::pair<int, int> {
    int e = basis.parent_edge[c];
    int sign = (c == edges[e][0]) ? 1 : -1;
    return {e, sign};
  };

  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    if (in_tree[e]) continue;
    basis.chords.push_back(e);
    int u = edges[e][0], v = edges[e][1];
    Cycle cyc;
    cyc.steps.push_back({e, 1});  // u -> v across the chord
    // Tree path v -> u through the lowest common ancestor.
    std::vector<std::pair<int, int>> up_v, up_u;
    int a = v, b = u;
    while (depth[a] > depth[b]) {
      up_v.push_back(step_up(a));
      a = basis.parent[a];
    }
    while (depth[b] > depth[a]) {
      up_u.push_back(step_up(b));
      b = basis.parent[b];
    }
    while (a != b) {
      up_v.push_back(step_up(a));
      a = basis.parent[a];
      up_u.push_back(step_up(b));
      b = basis.parent[b];
    }
    for (auto s : up_v) cyc.steps.push_back(s);
    for (auto it = up_u.rbegin(); it != up_u.rend(); ++it)
      cyc.steps.push_back({it->first, -it->second});
    basis.cycles.push_back(std::move(cyc));
  }
  return basis;
}

template <class T>
Cochain<T> tree_integrate(const SimplicialComplex& m, const CycleBasis& basis,
                          const Cochain<T>& c) {
  if (c.degree != 1) throw InputError("tree_integrate expects a 1-cochain");
  const auto& edges = m.edges();
  Cochain<T> f;
  f.degree = 0;
  f.values.assign(m.num_vertices(), T(0));
  for (size_t i = 1; i < basis.order.size(); ++i) {
    int v = basis.order[i];
    int p = basis.parent[v];
    int e = basis.parent_edge[v];
    if (v == edges[e][1])
      f.values[v] = f.values[p] + c.values[e];
    else
      f.values[v] = f.values[p] - c.values[e];
  }
  return f;
}

template Cochain<double> tree_integrate<double>(const SimplicialComplex&, const CycleBasis&,
                                                const Cochain<double>&);
template Cochain<Rat> tree_integrate<Rat>(const SimplicialComplex&, const CycleBasis&,
                                          const Cochain<Rat>&);
template Cochain<long long> tree_integrate<long long>(const SimplicialComplex&,
                                                      const CycleBasis&,
                                                      const Cochain<long long>&);

namespace {

// Boundaries of 2-simplices written in fundamental-cycle coordinates: the
// coefficient of chord j is the signed incidence of that edge in the
// triangle boundary.  Tree edges drop out of these coordinates.
MatZ boundary_relations(const SimplicialComplex& m, const CycleBasis& basis) {
  int nf = m.dimension() >= 2 ? m.num_simplices(2) : 0;
  int nchords = static_cast<int>(basis.chords.size());
  std::vector<int> chord_of_edge(m.edges().size(), -1);
  for (int j = 0; j < nchords; ++j) chord_of_edge[basis.chords[j]] = j;

  MatZ d(nf, VecZ(nchords, Int(0)));
  for (int f = 0; f < nf; ++f) {
    const auto& tri = m.skeleton(2)[f];
    for (int i = 0; i < 3; ++i) {
      std::vector<int> face;
      for (int t = 0; t < 3; ++t)
        if (t != i) face.push_back(tri[t]);
      int e = m.simplex_index(1, face);
      int j = chord_of_edge[e];
      if (j < 0) continue;
      d[f][j] += (i % 2 == 0) ? 1 : -1;
    }
  }
  return d;
}

MatQ to_rational(const MatZ& a) {
  MatQ out(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    out[i].reserve(a[i].size());
    for (const Int& x : a[i]) out[i].push_back(Rat(x));
  }
  return out;
}

Int selection_det(const MatZ& kernel, const std::vector<int>& cols) {
  int p = static_cast<int>(cols.size());
  MatZ b(p, VecZ(p));
  for (int i = 0; i < p; ++i)
    for (int t = 0; t < p; ++t) b[i][t] = kernel[i][cols[t]];
  return det_integer(b);
}

// Picks betti chords whose kernel submatrix is unimodular, so the basis
// transform below stays integral.  Greedy rank growth almost always lands on
// determinant one directly; otherwise descend by single-column swaps and as a
// last resort enumerate subsets under a fixed budget.
std::vector<int> select_unimodular(const MatZ& kernel, int nchords) {
  int p = static_cast<int>(kernel.size());
  std::vector<int> chosen;
  MatQ staged;
  for (int j = 0; j < nchords && static_cast<int>(chosen.size()) < p; ++j) {
    MatQ trial = staged;
    trial.emplace_back();
    for (int i = 0; i < p; ++i) trial.back().push_back(Rat(kernel[i][j]));
    if (rank_rational(trial) == static_cast<int>(trial.size())) {
      staged = std::move(trial);
      chosen.push_back(j);
    }
  }
  if (static_cast<int>(chosen.size()) != p)
    throw NumericError("cycle period matrix is rank deficient");

  Int best = abs(selection_det(kernel, chosen));
  while (best != 1) {
    bool improved = false;
    for (int pos = 0; pos < p && !improved; ++pos) {
      for (int j = 0; j < nchords && !improved; ++j) {
        if (std::find(chosen.begin(), chosen.end(), j) != chosen.end()) continue;
        std::vector<int> trial = chosen;
        trial[pos] = j;
        std::sort(trial.begin(), trial.end());
        Int d = abs(selection_det(kernel, trial));
        if (d != 0 && d < best) {
          chosen = trial;
          best = d;
          improved = true;
        }
      }
    }
    if (!improved) break;
  }
  if (best == 1) return chosen;

  // Exhaustive fallback in lexicographic order, budgeted.
  std::vector<int> comb(p);
  for (int i = 0; i < p; ++i) comb[i] = i;
  long long evals = 0;
  const long long budget = 5'000'000;
  while (true) {
    if (++evals > budget)
      throw NumericError("no unimodular cycle selection found within search budget");
    if (abs(selection_det(kernel, comb)) == 1) return comb;
    int i = p - 1;
    while (i >= 0 && comb[i] == nchords - p + i) --i;
    if (i < 0) break;
    ++comb[i];
    for (int t = i + 1; t < p; ++t) comb[t] = comb[t - 1] + 1;
  }
  throw NumericError("no unimodular cycle selection exists for this mesh");
}

}  // namespace

int betti1(const SimplicialComplex& m) {
  CycleBasis basis = cycle_basis(m);
  MatZ d = boundary_relations(m, basis);
  int rank = d.empty() ? 0 : rank_rational(to_rational(d));
  return static_cast<int>(basis.chords.size()) - rank;
}

CohomologyBasis h1_basis(const SimplicialComplex& m) {
  CohomologyBasis out;
  out.cycles = cycle_basis(m);
  const auto& edges = m.edges();
  int ne = static_cast<int>(edges.size());
  int nchords = static_cast<int>(out.cycles.chords.size());

  MatZ d = boundary_relations(m, out.cycles);
  int rank_d = d.empty() ? 0 : rank_rational(to_rational(d));
  out.betti = nchords - rank_d;

  // Cross-check against the raw coboundary rank: both formulas must count the
  // same thing on a connected complex.
  if (m.dimension() >= 2 && m.num_simplices(2) > 0) {
    MatQ d1(m.num_simplices(2), std::vector<Rat>(ne, Rat(0)));
    for (int f = 0; f < m.num_simplices(2); ++f) {
      const auto& tri = m.skeleton(2)[f];
      for (int i = 0; i < 3; ++i) {
        std::vector<int> face;
        for (int t = 0; t < 3; ++t)
          if (t != i) face.push_back(tri[t]);
        d1[f][m.simplex_index(1, face)] += (i % 2 == 0) ? 1 : -1;
      }
    }
    int alt = ne - rank_rational(d1) - (m.num_vertices() - 1);
    if (alt != out.betti) throw NumericError("first Betti number cross-check failed");
  }

  if (out.betti == 0) return out;

  MatZ kernel;
  if (d.empty()) {
    kernel.assign(nchords, VecZ(nchords, Int(0)));
    for (int i = 0; i < nchords; ++i) kernel[i][i] = 1;
  } else {
    kernel = integer_kernel(d);
  }
  if (static_cast<int>(kernel.size()) != out.betti)
    throw NumericError("integer kernel rank disagrees with Betti number");

  out.selected = select_unimodular(kernel, nchords);

  int p = out.betti;
  MatQ bsel(p, std::vector<Rat>(p));
  for (int i = 0; i < p; ++i)
    for (int t = 0; t < p; ++t) bsel[i][t] = Rat(kernel[i][out.selected[t]]);
  MatQ ident(p, std::vector<Rat>(p, Rat(0)));
  for (int i = 0; i < p; ++i) ident[i][i] = 1;
  MatQ s = solve_rational(bsel, ident);

  // Normalized period rows: periods over the selected cycles become the
  // identity, everything else stays integral because the transform is
  // unimodular.
  out.periods_all.assign(p, VecZ(nchords, Int(0)));
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < nchords; ++j) {
      Rat acc(0);
      for (int k = 0; k < p; ++k) acc += s[i][k] * Rat(kernel[k][j]);
      if (acc.get_den() != 1)
        throw NumericError("normalized periods are not integral");
      out.periods_all[i][j] = acc.get_num();
    }
  }
  for (int i = 0; i < p; ++i)
    for (int t = 0; t < p; ++t)
      if (out.periods_all[i][out.selected[t]] != (i == t ? 1 : 0))
        throw NumericError("period normalization self-check failed");

  // Chord-supported representatives, then the harmonic gauge: subtract the
  // exact coboundary that kills the combinatorial codifferential.  On highly
  // symmetric meshes this recovers coordinate differentials on the nose.
  int nv = m.num_vertices();
  std::vector<RatCochain> raw(p);
  for (int i = 0; i < p; ++i) {
    raw[i].degree = 1;
    raw[i].values.assign(ne, Rat(0));
    for (int j = 0; j < nchords; ++j)
      raw[i].values[out.cycles.chords[j]] = Rat(out.periods_all[i][j]);
  }

  if (nv > 1) {
    MatQ lap(nv - 1, std::vector<Rat>(nv - 1, Rat(0)));
    MatQ rhs(nv - 1, std::vector<Rat>(p, Rat(0)));
    for (int e = 0; e < ne; ++e) {
      int u = edges[e][0], v = edges[e][1];
      if (u > 0) lap[u - 1][u - 1] += 1;
      if (v > 0) lap[v - 1][v - 1] += 1;
      if (u > 0 && v > 0) {
        lap[u - 1][v - 1] -= 1;
        lap[v - 1][u - 1] -= 1;
      }
      // Codifferential of each representative, grounded at vertex 0.
      for (int i = 0; i < p; ++i) {
        if (v > 0) rhs[v - 1][i] += raw[i].values[e];
        if (u > 0) rhs[u - 1][i] -= raw[i].values[e];
      }
    }
    MatQ g = solve_rational(lap, rhs);
    for (int i = 0; i < p; ++i) {
      RatCochain nu;
      nu.degree = 1;
      nu.values.assign(ne, Rat(0));
      for (int e = 0; e < ne; ++e) {
        Rat gu = edges[e][0] > 0 ? g[edges[e][0] - 1][i] : Rat(0);
        Rat gv = edges[e][1] > 0 ? g[edges[e][1] - 1][i] : Rat(0);
        nu.values[e] = raw[i].values[e] - (gv - gu);
      }
      out.reps.push_back(std::move(nu));
    }
  } else {
    out.reps = std::move(raw);
  }

  // Exactness self-checks: representatives are closed and their periods
  // match the normalized rows, all in exact arithmetic.
  for (int i = 0; i < p; ++i) {
    if (m.dimension() >= 2) {
      RatCochain dd = coboundary(m, out.reps[i]);
      for (const Rat& x : dd.values)
        if (x != 0) throw NumericError("harmonic representative is not closed");
    }
    for (int j = 0; j < nchords; ++j)
      if (period_over(out.reps[i], out.cycles.cycles[j]) != Rat(out.periods_all[i][j]))
        throw NumericError("harmonic representative period drifted");
  }
  return out;
}

Decomposition decompose(const SimplicialComplex& m, const CohomologyBasis& basis,
                        const RealCochain& beta, double tol) {
  if (beta.degree != 1) throw InputError("decompose expects a 1-cochain");
  if (static_cast<int>(beta.values.size()) != static_cast<int>(m.edges().size()))
    throw InputError("cochain length does not match edge count");

  Decomposition out;
  out.coefficients.resize(basis.betti);
  for (int i = 0; i < basis.betti; ++i)
    out.coefficients[i] =
        period_over(beta, basis.cycles.cycles[basis.selected[i]]);

  RealCochain rho;
  rho.degree = 1;
  rho.values = beta.values;
  for (int i = 0; i < basis.betti; ++i) {
    double a = out.coefficients[i];
    for (size_t e = 0; e < rho.values.size(); ++e)
      rho.values[e] -= a * basis.reps[i].values[e].get_d();
  }

  out.potential = tree_integrate(m, basis.cycles, rho);
  double worst = 0.0;
  const auto& edges = m.edges();
  for (size_t e = 0; e < edges.size(); ++e) {
    double df = out.potential.values[edges[e][1]] - out.potential.values[edges[e][0]];
    worst = std::max(worst, std::abs(rho.values[e] - df));
  }
  out.residual = worst;
  if (worst > tol) {
    std::ostringstream msg;
    msg << "decomposition residual " << worst << " exceeds tolerance " << tol
        << " (input cochain is not closed enough)";
    throw NumericError(msg.str());
  }
  return out;
}

RealCochain assemble(const SimplicialComplex& m, const CohomologyBasis& basis,
                     const std::vector<double>& coefficients, const RealCochain& potential) {
  if (static_cast<int>(coefficients.size()) != basis.betti)
    throw InputError("coefficient count does not match basis size");
  const auto& edges = m.edges();
  RealCochain out;
  out.degree = 1;
  out.values.assign(edges.size(), 0.0);
  for (size_t e = 0; e < edges.size(); ++e) {
    double v = potential.values[edges[e][1]] - potential.values[edges[e][0]];
    for (int i = 0; i < basis.betti; ++i)
      v += coefficients[i] * basis.reps[i].values[e].get_d();
    out.values[e] = v;
  }
  return out;
}

}  // namespace toruscope
