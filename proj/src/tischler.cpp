#include "toruscope/tischler.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include "toruscope/errors.hpp"

namespace toruscope {

TischlerCoefficients rationalize(const SimplicialComplex& m, const CohomologyBasis& basis,
                                 const std::vector<Decomposition>& decomps, double eps0,
                                 double independence_tol) {
  if (decomps.empty()) throw InputError("rationalize needs at least one decomposition");
  if (!(eps0 > 0)) throw InputError("eps must be positive");
  int k = static_cast<int>(decomps.size());
  int p = basis.betti;

  TischlerCoefficients tc;
  tc.eps_requested = eps0;
  for (const Decomposition& d : decomps) tc.a.push_back(d.coefficients);

  double eps = eps0;
  while (true) {
    MatQ q(k);
    for (int i = 0; i < k; ++i) {
      q[i].reserve(p);
      for (int j = 0; j < p; ++j)
        q[i].push_back(continued_fraction_approx(Rat(tc.a[i][j]), Rat(eps)));
    }
    std::vector<RealCochain> perturbed;
    perturbed.reserve(k);
    for (int i = 0; i < k; ++i) {
      std::vector<double> qd(p);
      for (int j = 0; j < p; ++j) qd[j] = q[i][j].get_d();
      perturbed.push_back(assemble(m, basis, qd, decomps[i].potential));
    }
    IndependenceReport rep = independence_report(m, perturbed, independence_tol);
    if (rep.pass) {
      tc.q = std::move(q);
      tc.perturbed = std::move(rep);
      break;
    }
    eps /= 2;
    ++tc.halvings;
    if (eps < 1e-13)
      throw NumericError("rationalization tolerance underflow (mesh too degenerate)");
  }
  tc.eps_threshold = eps;

  double used = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < p; ++j) {
      Rat diff = tc.q[i][j] - Rat(tc.a[i][j]);
      used = std::max(used, std::abs(diff.get_d()));
    }
  tc.eps_used = used;
  return tc;
}

void integerize(TischlerCoefficients& tc) {
  int k = static_cast<int>(tc.q.size());
  tc.scale.assign(k, 1);
  tc.kmat.assign(k, {});
  for (int i = 0; i < k; ++i) {
    Int n(1);
    for (const Rat& x : tc.q[i])
      mpz_lcm(n.get_mpz_t(), n.get_mpz_t(), x.get_den().get_mpz_t());
    if (!n.fits_slong_p()) throw NumericError("integer scaling overflow");
    tc.scale[i] = n.get_si();
    for (const Rat& x : tc.q[i]) {
      Int kij = x.get_num() * (n / x.get_den());
      if (!kij.fits_slong_p()) throw NumericError("integer coefficient overflow");
      tc.kmat[i].push_back(kij.get_si());
    }
  }
}

double FibrationMap::lift(int v, int i) const {
  return combo_potential[i].values[v].get_d() + scaled_potential[i].values[v];
}

double FibrationMap::theta(int v, int i) const {
  double f = lift(v, i);
  f -= std::floor(f);
  if (f >= 1.0) f = 0.0;
  return f;
}

RealCochain FibrationMap::increment(const SimplicialComplex& m, int i) const {
  const auto& edges = m.edges();
  RealCochain out;
  out.degree = 1;
  out.values.resize(edges.size());
  for (size_t e = 0; e < edges.size(); ++e) {
    double dpot = scaled_potential[i].values[edges[e][1]] -
                  scaled_potential[i].values[edges[e][0]];
    out.values[e] = combo[i].values[e].get_d() + dpot;
  }
  return out;
}

FibrationMap build_fibration_map(const SimplicialComplex& m, const CohomologyBasis& basis,
                                 const std::vector<std::vector<long long>>& kmat,
                                 const std::vector<std::vector<long long>>& scale_or_empty,
                                 const std::vector<RealCochain>& potentials) {
  int k = static_cast<int>(kmat.size());
  if (k == 0) throw InputError("fibration map needs at least one row of winding numbers");
  int p = basis.betti;
  for (const auto& row : kmat)
    if (static_cast<int>(row.size()) != p)
      throw InputError("winding matrix width does not match the Betti number");

  std::vector<long long> scale(k, 1);
  if (!scale_or_empty.empty()) {
    if (static_cast<int>(scale_or_empty.size()) != k)
      throw InputError("scale row count does not match winding matrix");
    for (int i = 0; i < k; ++i) {
      if (scale_or_empty[i].size() != 1 || scale_or_empty[i][0] < 1)
        throw InputError("each scale entry must be a single positive integer");
      scale[i] = scale_or_empty[i][0];
    }
  }
  if (!potentials.empty() && static_cast<int>(potentials.size()) != k)
    throw InputError("potential count does not match winding matrix");

  int ne = static_cast<int>(m.edges().size());
  int nv = m.num_vertices();

  FibrationMap fib;
  fib.k = k;
  fib.base_vertex = 0;
  fib.kmat = kmat;
  fib.scale = scale;
  for (int i = 0; i < k; ++i) {
    RatCochain c;
    c.degree = 1;
    c.values.assign(ne, Rat(0));
    for (int j = 0; j < p; ++j) {
      if (kmat[i][j] == 0) continue;
      Rat w(static_cast<long>(kmat[i][j]));
      for (int e = 0; e < ne; ++e) c.values[e] += w * basis.reps[j].values[e];
    }
    for (size_t jj = 0; jj < basis.cycles.cycles.size(); ++jj) {
      Rat per = period_over(c, basis.cycles.cycles[jj]);
      if (per.get_den() != 1)
        throw NumericError("non-integer period on a chord edge (construction bug)");
    }
    fib.combo.push_back(c);
    fib.combo_potential.push_back(tree_integrate(m, basis.cycles, c));

    RealCochain sp;
    sp.degree = 0;
    sp.values.assign(nv, 0.0);
    if (!potentials.empty()) {
      if (potentials[i].degree != 0 ||
          static_cast<int>(potentials[i].values.size()) != nv)
        throw InputError("potentials must be vertex cochains on this mesh");
      double f0 = potentials[i].values[0];
      double s = static_cast<double>(scale[i]);
      for (int v = 0; v < nv; ++v) sp.values[v] = s * (potentials[i].values[v] - f0);
    }
    fib.scaled_potential.push_back(std::move(sp));
  }
  return fib;
}

namespace {

// Walks all nonnegative integer tuples (a_0..a_n) summing to r; fn receives
// the tuple.  Barycentric sample grid over one simplex.
void for_each_composition(int n, int r, std::vector<int>& a,
                          const std::function<void(const std::vector<int>&)>& fn,
                          int pos = 1, int used = 0) {
  if (pos == n + 1) {
    a[0] = r - used;
    fn(a);
    return;
  }
  for (int v = 0; v + used <= r; ++v) {
    a[pos] = v;
    for_each_composition(n, r, a, fn, pos + 1, used + v);
  }
}

double frac01(double x) {
  double f = x - std::floor(x);
  if (f >= 1.0) f = 0.0;
  return f;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

FibrationCertificate verify_fibration(const SimplicialComplex& m, const FibrationMap& fib,
                                      const VerifyOptions& opts) {
  FibrationCertificate cert;
  cert.k = fib.k;
  cert.bins = opts.bins;
  int n = m.dimension();
  int k = fib.k;
  int nt = m.num_tops();
  if (opts.bins < 2) throw InputError("bins must be at least 2");

  std::vector<RealCochain> incs;
  incs.reserve(k);
  for (int i = 0; i < k; ++i) incs.push_back(fib.increment(m, i));

  cert.rank = independence_report(m, incs, opts.rank_tol);
  for (int t = 0; t < nt; ++t)
    if (cert.rank.ranks[t] < k) cert.offending.push_back(t);
  if (!cert.rank.pass) {
    cert.verdict = "fail: rank deficient";
    return cert;
  }

  // Per-top lift tables: row j = unwrapped image of vertex j of the stored
  // top tuple, anchored at the first vertex's global lift.
  std::vector<Eigen::MatrixXd> lifts(nt);
  for (int t = 0; t < nt; ++t) {
    const auto& tv = m.top(t);
    Eigen::MatrixXd l(n + 1, k);
    for (int i = 0; i < k; ++i) l(0, i) = fib.lift(tv[0], i);
    for (int j = 1; j <= n; ++j) {
      int u = tv[0], v = tv[j];
      int e = m.edge_index(std::min(u, v), std::max(u, v));
      double sgn = u < v ? 1.0 : -1.0;
      for (int i = 0; i < k; ++i) l(j, i) = l(0, i) + sgn * incs[i].values[e];
    }
    lifts[t] = std::move(l);
  }

  double maxinc = 0.0;
  for (const RealCochain& c : incs)
    for (double x : c.values) maxinc = std::max(maxinc, std::abs(x));
  int subdiv = std::max(8, static_cast<int>(std::ceil(2.0 * opts.bins * maxinc)));

  long long cells = 1;
  for (int i = 0; i < k; ++i) {
    cells *= opts.bins;
    if (cells > (1LL << 28)) throw InputError("bins^k too large to enumerate");
  }
  cert.cells_total = cells;

  std::vector<char> hit(cells, 0);
  std::vector<int> comp(n + 1, 0);
  std::vector<double> theta(k);
  for (int t = 0; t < nt; ++t) {
    const Eigen::MatrixXd& l = lifts[t];
    for_each_composition(n, subdiv, comp, [&](const std::vector<int>& a) {
      for (int i = 0; i < k; ++i) {
        double acc = 0.0;
        for (int j = 0; j <= n; ++j) acc += (static_cast<double>(a[j]) / subdiv) * l(j, i);
        theta[i] = frac01(acc);
      }
      long long cell = 0;
      for (int i = 0; i < k; ++i) {
        int b = static_cast<int>(theta[i] * opts.bins);
        if (b >= opts.bins) b = opts.bins - 1;
        cell = cell * opts.bins + b;
      }
      hit[cell] = 1;
      ++cert.samples;
    });
  }
  cert.cells_hit = std::count(hit.begin(), hit.end(), char(1));
  cert.coverage = static_cast<double>(cert.cells_hit) / static_cast<double>(cells);
  cert.covered = cert.cells_hit == cells;

  // Fiber census at bin centers.  Values whose preimage grazes a simplex
  // boundary within the guard band are discarded rather than risk double
  // counting across shared faces.
  if (k == n) {
    std::vector<Eigen::FullPivLU<Eigen::MatrixXd>> lu(nt);
    std::vector<double> sigma_min(nt);
    for (int t = 0; t < nt; ++t) {
      Eigen::MatrixXd mm(k, n);
      for (int i = 0; i < k; ++i)
        for (int j = 1; j <= n; ++j) mm(i, j - 1) = lifts[t](j, i) - lifts[t](0, i);
      lu[t] = Eigen::FullPivLU<Eigen::MatrixXd>(mm);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(mm);
      sigma_min[t] = svd.singularValues()(k - 1);
    }

    std::vector<int> bin(k, 0);
    while (true) {
      Eigen::VectorXd y(k);
      for (int i = 0; i < k; ++i) y(i) = (bin[i] + 0.5) / opts.bins;

      bool reliable = true;
      long long count = 0;
      for (int t = 0; t < nt && reliable; ++t) {
        const Eigen::MatrixXd& l = lifts[t];
        double gb = opts.guard / sigma_min[t];
        std::vector<long long> zlo(k), zhi(k);
        bool any = true;
        for (int i = 0; i < k; ++i) {
          double lo = 0.0, hi = 0.0;
          for (int j = 1; j <= n; ++j) {
            lo = std::min(lo, l(j, i) - l(0, i));
            hi = std::max(hi, l(j, i) - l(0, i));
          }
          zlo[i] = static_cast<long long>(std::ceil(lo + l(0, i) - y(i) - 1e-9));
          zhi[i] = static_cast<long long>(std::floor(hi + l(0, i) - y(i) + 1e-9));
          if (zlo[i] > zhi[i]) any = false;
        }
        if (!any) continue;
        std::vector<long long> z = zlo;
        while (reliable) {
          Eigen::VectorXd rhs(k);
          for (int i = 0; i < k; ++i) rhs(i) = y(i) + z[i] - l(0, i);
          Eigen::VectorXd lam = lu[t].solve(rhs);
          double minb = 1.0 - lam.sum();
          for (int i = 0; i < n; ++i) minb = std::min(minb, lam(i));
          if (minb > gb)
            ++count;
          else if (minb > -gb)
            reliable = false;  // grazes a face: discard this regular value
          int axis = k - 1;
          while (axis >= 0 && ++z[axis] > zhi[axis]) {
            z[axis] = zlo[axis];
            --axis;
          }
          if (axis < 0) break;
        }
      }
      if (reliable) {
        cert.fiber_counts.push_back(count);
        ++cert.regular_values;
      }
      int axis = k - 1;
      while (axis >= 0 && ++bin[axis] >= opts.bins) {
        bin[axis] = 0;
        --axis;
      }
      if (axis < 0) break;
    }
  } else if (k == 1) {
    // Level sets are (n-1)-manifolds; count connected components by gluing
    // level crossings across shared ridges.
    const auto& ridges = m.skeleton(n - 1);
    std::vector<std::vector<int>> ridge_tops(ridges.size());
    for (int t = 0; t < nt; ++t) {
      std::vector<int> sorted_top = m.top(t);
      std::sort(sorted_top.begin(), sorted_top.end());
      for (int drop = 0; drop <= n; ++drop) {
        std::vector<int> face;
        for (int j = 0; j <= n; ++j)
          if (j != drop) face.push_back(sorted_top[j]);
        ridge_tops[m.simplex_index(n - 1, face)].push_back(t);
      }
    }
    // Local index of each vertex within its top, for lift lookups.
    auto local_index = [&](int t, int v) {
      const auto& tv = m.top(t);
      for (int j = 0; j <= n; ++j)
        if (tv[j] == v) return j;
      return -1;
    };

    for (int b = 0; b < opts.bins; ++b) {
      double y = (b + 0.5) / opts.bins;
      bool reliable = true;
      std::map<std::pair<int, long long>, int> node_id;

      for (int t = 0; t < nt && reliable; ++t) {
        double vmin = lifts[t].col(0).minCoeff();
        double vmax = lifts[t].col(0).maxCoeff();
        long long zlo = static_cast<long long>(std::ceil(vmin - y - 1e-9));
        long long zhi = static_cast<long long>(std::floor(vmax - y + 1e-9));
        for (long long z = zlo; z <= zhi && reliable; ++z) {
          double level = y + z;
          for (int j = 0; j <= n; ++j)
            if (std::abs(level - lifts[t](j, 0)) <= opts.guard) reliable = false;
          if (!reliable) break;
          if (level > vmin && level < vmax) {
            int id = static_cast<int>(node_id.size());
            node_id.emplace(std::make_pair(t, z), id);
          }
        }
      }
      if (!reliable) continue;

      UnionFind uf(static_cast<int>(node_id.size()));
      for (size_t ri = 0; ri < ridges.size() && reliable; ++ri) {
        if (ridge_tops[ri].size() != 2) continue;
        int t1 = ridge_tops[ri][0], t2 = ridge_tops[ri][1];
        double rmin = 1e300, rmax = -1e300;
        for (int v : ridges[ri]) {
          double lv = lifts[t1](local_index(t1, v), 0);
          rmin = std::min(rmin, lv);
          rmax = std::max(rmax, lv);
        }
        int anchor = ridges[ri][0];
        double delta = lifts[t2](local_index(t2, anchor), 0) -
                       lifts[t1](local_index(t1, anchor), 0);
        long long dz = std::llround(delta);
        if (std::abs(delta - dz) > 1e-6) {
          reliable = false;
          break;
        }
        long long zlo = static_cast<long long>(std::ceil(rmin - y - 1e-9));
        long long zhi = static_cast<long long>(std::floor(rmax - y + 1e-9));
        for (long long z = zlo; z <= zhi; ++z) {
          double level = y + z;
          if (!(level > rmin && level < rmax)) continue;
          auto i1 = node_id.find({t1, z});
          auto i2 = node_id.find({t2, z + dz});
          if (i1 == node_id.end() || i2 == node_id.end()) {
            reliable = false;
            break;
          }
          uf.unite(i1->second, i2->second);
        }
      }
      if (!reliable) continue;

      long long comps = 0;
      for (const auto& [key, id] : node_id)
        if (uf.find(id) == id) ++comps;
      cert.fiber_counts.push_back(comps);
      ++cert.regular_values;
    }
  }

  if (!cert.fiber_counts.empty()) {
    cert.fiber_constant = std::all_of(cert.fiber_counts.begin(), cert.fiber_counts.end(),
                                      [&](long long c) { return c == cert.fiber_counts[0]; });
    if (cert.fiber_constant) cert.degree = cert.fiber_counts[0];
  }

  if (!cert.covered) {
    cert.verdict = "fail: not surjective";
    return cert;
  }
  if (k == n) {
    if (cert.fiber_constant && cert.regular_values > 0) {
      cert.verdict = "covering of degree " + std::to_string(cert.degree);
      cert.pass = true;
    } else {
      cert.verdict = "fail: inconsistent fiber counts";
    }
  } else if (k == 1) {
    if (cert.fiber_constant && cert.regular_values > 0) {
      cert.verdict = "fibration over S^1";
      cert.pass = true;
    } else {
      cert.verdict = "fail: inconsistent fiber counts";
    }
  } else {
    cert.verdict = "fibration over T^" + std::to_string(k);
    cert.pass = true;
  }
  return cert;
}

CoveringReport covering_report(const SimplicialComplex& m, const FibrationCertificate& cert) {
  if (cert.k != m.dimension())
    throw InputError("covering report requires a map onto a torus of full dimension");
  if (!cert.rank.pass)
    throw InputError("covering report requires a rank-certified map");
  CoveringReport rep;
  std::string tn = "T^" + std::to_string(m.dimension());
  if (!cert.fiber_constant || cert.regular_values == 0) {
    rep.statement = "inconsistent preimage counts (regular-value sampling failed)";
    return rep;
  }
  rep.consistent = true;
  rep.degree = cert.degree;
  if (rep.degree == 1)
    rep.statement = "Theta is a diffeomorphism; M is diffeomorphic to " + tn;
  else
    rep.statement = "Theta is a " + std::to_string(rep.degree) +
                    "-sheeted covering; M is diffeomorphic to " + tn;
  return rep;
}

TischlerResult tischler_pipeline(const SimplicialComplex& m,
                                 const std::vector<RealCochain>& forms,
                                 const PipelineOptions& opts) {
  if (forms.empty()) throw InputError("at least one form is required");
  if (!m.validation().connected) throw InputError("mesh is not connected");
  if (!m.validation().closed_manifold) throw InputError("mesh is not a closed manifold");

  TischlerResult r;
  int k = static_cast<int>(forms.size());

  for (int i = 0; i < k; ++i)
    r.closedness.push_back(verify_closed(m, forms[i], opts.closed_tol));
  for (int i = 0; i < k; ++i) {
    if (!r.closedness[i].closed) {
      std::ostringstream msg;
      msg << "form " << i << " is not closed (residual " << r.closedness[i].residual << ")";
      r.failure_stage = "closedness";
      r.failure_message = msg.str();
      r.exit_code = 1;
      return r;
    }
  }

  r.independence = independence_report(m, forms, opts.independence_tol);
  r.has_independence = true;
  if (!r.independence.pass) {
    r.failure_stage = "independence";
    r.failure_message = "independence failed";
    r.exit_code = 1;
    return r;
  }

  std::string stage = "h1_basis";
  try {
    CohomologyBasis basis = h1_basis(m);
    r.betti = basis.betti;
    if (k > basis.betti) {
      std::ostringstream msg;
      msg << "requested k=" << k << " independent classes but first Betti number is "
          << basis.betti;
      r.failure_stage = "h1_basis";
      r.failure_message = msg.str();
      r.exit_code = 1;
      return r;
    }

    stage = "decompose";
    for (int i = 0; i < k; ++i)
      r.decomps.push_back(decompose(m, basis, forms[i], opts.decompose_tol));

    // Independent forms must represent distinct classes; identical period
    // rows here mean the affine surrogate misjudged independence.
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) {
        double diff = 0.0;
        for (int t = 0; t < basis.betti; ++t)
          diff = std::max(diff, std::abs(r.decomps[i].coefficients[t] -
                                         r.decomps[j].coefficients[t]));
        if (diff < 1e-9)
          throw NumericError("distinct-class invariant violated (mesh too coarse)");
      }

    stage = "rationalize";
    r.coeffs = rationalize(m, basis, r.decomps, opts.eps, opts.independence_tol);
    r.has_coeffs = true;

    if (rank_rational(r.coeffs.q) < k) {
      r.failure_stage = "class_rank";
      r.failure_message = "forms are dependent in cohomology";
      r.exit_code = 1;
      return r;
    }

    stage = "integerize";
    integerize(r.coeffs);

    stage = "build";
    std::vector<RealCochain> pots;
    for (const Decomposition& d : r.decomps) pots.push_back(d.potential);
    std::vector<std::vector<long long>> scales;
    for (long long s : r.coeffs.scale) scales.push_back({s});
    FibrationMap fib = build_fibration_map(m, basis, r.coeffs.kmat, scales, pots);

    stage = "verify";
    VerifyOptions vo;
    vo.bins = opts.bins;
    vo.rank_tol = opts.independence_tol;
    r.cert = verify_fibration(m, fib, vo);
    r.has_cert = true;
    if (!r.cert.pass) {
      r.failure_stage = "verify";
      r.failure_message = r.cert.verdict;
      r.exit_code = 1;
      return r;
    }
    if (k == m.dimension()) {
      r.covering = covering_report(m, r.cert);
      r.has_covering = true;
    }
  } catch (const NumericError& e) {
    r.failure_stage = stage;
    r.failure_message = e.what();
    r.exit_code = 3;
    return r;
  }
  return r;
}

}  // namespace toruscope
