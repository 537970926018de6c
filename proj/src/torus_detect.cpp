#include "toruscope/torus_detect.hpp"

#include "toruscope/errors.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>

namespace toruscope {

namespace {

constexpr double kRankTol = 1e-8;

int svd_rank(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  int r = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > tol) ++r;
  return r;
}

OdeOptions flow_options(const SystemDefinition& sys, double tol) {
  OdeOptions opts;
  opts.tol = tol;
  opts.box = &sys.box;
  opts.box_slack = 1.0;
  return opts;
}

}  // namespace

LevelSetSample project_to_level(const SystemDefinition& sys, const Eigen::VectorXd& level,
                                const Eigen::VectorXd& guess, double tol, int max_iter) {
  if (level.size() != sys.num_integrals())
    throw InputError("level must have one value per integral");
  if (guess.size() != sys.dim)
    throw InputError("guess must have one value per coordinate");
  LevelSetSample out;
  out.level = level;
  Eigen::VectorXd x = guess;
  int it = 0;
  double res = (integral_values(sys, x) - level).norm();
  while (res > tol && it < max_iter) {
    Eigen::MatrixXd jac = integral_jacobian(sys, x);
    Eigen::VectorXd step =
        jac.completeOrthogonalDecomposition().solve(integral_values(sys, x) - level);
    x -= step;
    if (!x.allFinite())
      throw NumericError("projection to the level set diverged");
    ++it;
    res = (integral_values(sys, x) - level).norm();
  }
  if (res > tol)
    throw NumericError("projection to the level set did not converge within " +
                       std::to_string(max_iter) + " iterations");
  out.anchor = x;
  out.residual = res;
  out.iterations = it;
  out.jacobian_rank = svd_rank(integral_jacobian(sys, x), kRankTol);
  out.bivector_rank = svd_rank(bivector_at(sys, x), kRankTol);
  if (out.jacobian_rank < sys.num_integrals())
    throw NumericError("anchor not regular (integral gradients are dependent at the level)");
  return out;
}

Eigen::VectorXd hamiltonian_flow(const SystemDefinition& sys, int field, double t,
                                 const Eigen::VectorXd& x, double ode_tol,
                                 const std::function<void(double, const Eigen::VectorXd&)>&
                                     monitor) {
  const Expression& f = sys.integrals[field];
  auto rhs = [&sys, &f](const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    dy = hamiltonian_field(sys, f, y);
  };
  OdeOptions opts = flow_options(sys, ode_tol);
  opts.monitor = monitor;
  return integrate(rhs, x, t, opts);
}

Eigen::VectorXd joint_flow(const SystemDefinition& sys, const Eigen::VectorXd& t,
                           const Eigen::VectorXd& x) {
  Eigen::VectorXd y = x;
  for (int i = static_cast<int>(t.size()) - 1; i >= 0; --i)
    y = hamiltonian_flow(sys, i, t[i], y);
  return y;
}

double commutation_residual(const SystemDefinition& sys, int i, int j,
                            const Eigen::VectorXd& x, double t, double s) {
  Eigen::VectorXd a = hamiltonian_flow(sys, i, t, hamiltonian_flow(sys, j, s, x));
  Eigen::VectorXd b = hamiltonian_flow(sys, j, s, hamiltonian_flow(sys, i, t, x));
  return (a - b).norm();
}

DualCoframe dual_coframe(const SystemDefinition& sys, const LevelSetSample& sample) {
  const int r = sys.rank;
  const int n = sys.dim;
  DualCoframe dc;
  dc.fields.resize(n, r);
  for (int i = 0; i < r; ++i)
    dc.fields.col(i) = hamiltonian_field(sys, sys.integrals[i], sample.anchor);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(dc.fields);
  double smax = svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
  double smin = svd.singularValues().size() > 0
                    ? svd.singularValues()[svd.singularValues().size() - 1]
                    : 0.0;
  if (smin <= kRankTol * std::max(1.0, smax))
    throw NumericError("hamiltonian fields are dependent at the anchor");
  Eigen::MatrixXd gram = dc.fields.transpose() * dc.fields;
  dc.coframe = gram.ldlt().solve(dc.fields.transpose());
  dc.pairing_residual =
      (dc.coframe * dc.fields - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff();
  dc.commutator_residuals = Eigen::MatrixXd::Zero(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j) {
      double c = commutation_residual(sys, i, j, sample.anchor, 0.1, 0.1);
      dc.commutator_residuals(i, j) = c;
      dc.commutator_residuals(j, i) = c;
    }
  return dc;
}

namespace {

struct ReturnCandidate {
  Eigen::VectorXd t;
  double dist = 0.0;
};

/// Walks the (grid+1)^r table of joint-flow endpoints incrementally: at
/// recursion level f the state advances by one grid step of field f between
/// child enumerations, so every table entry costs one short integration.
void walk_grid(const SystemDefinition& sys, const Eigen::VectorXd& anchor, int f, double dt,
               int grid, Eigen::VectorXd state, std::vector<int>& idx,
               const std::vector<long long>& stride, std::vector<double>& dist) {
  for (int k = 0; k <= grid; ++k) {
    idx[f] = k;
    if (f == 0) {
      long long flat = 0;
      for (size_t a = 0; a < idx.size(); ++a) flat += idx[a] * stride[a];
      dist[flat] = (state - anchor).norm();
    } else {
      walk_grid(sys, anchor, f - 1, dt, grid, state, idx, stride, dist);
    }
    if (k < grid) state = hamiltonian_flow(sys, f, dt, state);
  }
}

}  // namespace

PeriodLattice period_lattice(const SystemDefinition& sys, const LevelSetSample& sample,
                             const LatticeSearch& search) {
  const int r = sys.rank;
  PeriodLattice lat;
  if (search.grid < 2 || search.t_max <= 0)
    throw InputError("lattice search needs grid >= 2 and t_max > 0");
  const double dt = search.t_max / search.grid;
  const int g = search.grid;

  std::vector<long long> stride(r);
  long long total = 1;
  for (int a = 0; a < r; ++a) {
    stride[a] = total;
    total *= (g + 1);
  }
  if (total > (1 << 26)) throw InputError("lattice grid too large to enumerate");

  std::vector<double> dist(total, 0.0);
  std::vector<int> idx(r, 0);
  try {
    walk_grid(sys, sample.anchor, r - 1, dt, g, sample.anchor, idx, stride, dist);
  } catch (const NumericError& e) {
    lat.note = std::string("flow scan aborted: ") + e.what();
    return lat;
  }

  // Strict local minima over the full Moore neighborhood.
  std::vector<std::pair<double, long long>> cands;
  std::vector<int> pt(r), nb(r), off(r);
  for (long long flat = 1; flat < total; ++flat) {
    long long rem = flat;
    for (int a = r - 1; a >= 0; --a) {
      pt[a] = static_cast<int>(rem / stride[a]);
      rem %= stride[a];
    }
    double d = dist[flat];
    bool strict = true;
    std::fill(off.begin(), off.end(), -1);
    while (strict) {
      bool all_zero = std::all_of(off.begin(), off.end(), [](int o) { return o == 0; });
      if (!all_zero) {
        bool valid = true;
        long long nflat = 0;
        for (int a = 0; a < r; ++a) {
          nb[a] = pt[a] + off[a];
          if (nb[a] < 0 || nb[a] > g) { valid = false; break; }
          nflat += nb[a] * stride[a];
        }
        if (valid && dist[nflat] <= d) strict = false;
      }
      int a = 0;
      while (a < r && ++off[a] > 1) {
        off[a] = -1;
        ++a;
      }
      if (a == r) break;
    }
    if (strict) cands.emplace_back(d, flat);
  }
  std::sort(cands.begin(), cands.end());
  if (cands.size() > 200) cands.resize(200);

  // Gauss-Newton refinement of each candidate.  The columns of the Jacobian
  // are the fields at the endpoint; valid because the flows commute.
  std::vector<ReturnCandidate> refined;
  for (const auto& [d0, flat] : cands) {
    long long rem = flat;
    Eigen::VectorXd t(r);
    for (int a = r - 1; a >= 0; --a) {
      t[a] = static_cast<double>(rem / stride[a]) * dt;
      rem %= stride[a];
    }
    bool ok = false;
    double resid = 0.0;
    try {
      for (int iter = 0; iter < 60; ++iter) {
        Eigen::VectorXd x = joint_flow(sys, t, sample.anchor);
        Eigen::VectorXd gap = x - sample.anchor;
        resid = gap.norm();
        if (resid <= search.return_tol) { ok = true; break; }
        Eigen::MatrixXd jac(sys.dim, r);
        for (int i = 0; i < r; ++i)
          jac.col(i) = hamiltonian_field(sys, sys.integrals[i], x);
        Eigen::VectorXd step = jac.completeOrthogonalDecomposition().solve(gap);
        double cap = dt;
        double norm = step.cwiseAbs().maxCoeff();
        if (norm > cap) step *= cap / norm;
        t -= step;
        if (t.cwiseAbs().maxCoeff() > search.t_max + 2 * dt) break;
      }
    } catch (const NumericError&) {
      ok = false;
    }
    if (!ok) continue;
    if (t.cwiseAbs().maxCoeff() < 0.6 * dt) continue;  // trivial return at t = 0
    bool dup = false;
    for (const ReturnCandidate& rc : refined)
      if ((rc.t - t).cwiseAbs().maxCoeff() < 1e-6) { dup = true; break; }
    if (!dup) refined.push_back({t, resid});
  }

  std::sort(refined.begin(), refined.end(), [](const ReturnCandidate& a,
                                               const ReturnCandidate& b) {
    double na = a.t.norm(), nb2 = b.t.norm();
    if (na != nb2) return na < nb2;
    return std::lexicographical_compare(a.t.data(), a.t.data() + a.t.size(), b.t.data(),
                                        b.t.data() + b.t.size());
  });
  for (const ReturnCandidate& rc : refined) {
    lat.returns.push_back(rc.t);
    lat.return_residuals.push_back(rc.dist);
  }

  // Greedy rank-increasing basis in order of increasing norm.
  Eigen::MatrixXd bmat(r, 0);
  for (const ReturnCandidate& rc : refined) {
    if (static_cast<int>(lat.basis.size()) == r) break;
    Eigen::MatrixXd trial(r, bmat.cols() + 1);
    if (bmat.cols() > 0) trial.leftCols(bmat.cols()) = bmat;
    trial.col(bmat.cols()) = rc.t;
    if (svd_rank(trial, 1e-6) == trial.cols()) {
      bmat = trial;
      lat.basis.push_back(rc.t);
      lat.basis_residuals.push_back(rc.dist);
    }
  }
  lat.rank = static_cast<int>(lat.basis.size());

  if (lat.rank > 0) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(bmat);
    for (const Eigen::VectorXd& v : lat.returns) {
      Eigen::VectorXd c = cod.solve(v);
      for (int i = 0; i < c.size(); ++i) c[i] = std::round(c[i]);
      double res = (bmat * c - v).cwiseAbs().maxCoeff();
      lat.coherence_residual = std::max(lat.coherence_residual, res);
    }
  }

  if (lat.returns.empty())
    lat.note = "no returns found within t_max (enlarge t_max or refine the grid)";
  else if (lat.rank < r)
    lat.note = "return lattice has rank " + std::to_string(lat.rank) + " < " +
               std::to_string(r);
  return lat;
}

FiberVerdict fiber_verdict(const SystemDefinition& sys, const Eigen::VectorXd& level,
                           const std::vector<Eigen::VectorXd>& guesses,
                           const LatticeSearch& search, int samples, unsigned long long seed) {
  FiberVerdict out;
  out.classification = classify_system(sys, samples, seed);
  if (!out.classification.integrable) {
    out.verdict = "inconclusive (" + out.classification.verdict + ")";
    return out;
  }
  if (guesses.empty()) throw InputError("at least one guess point is required");

  std::string reason;
  for (const Eigen::VectorXd& guess : guesses) {
    try {
      out.sample = project_to_level(sys, level, guess);
      out.projected = true;
      break;
    } catch (const NumericError& e) {
      reason = e.what();
    }
  }
  if (!out.projected) {
    out.verdict = "inconclusive (" + reason + ")";
    return out;
  }

  try {
    out.coframe = dual_coframe(sys, out.sample);
    out.coframe_ok = true;
  } catch (const NumericError& e) {
    out.verdict = "inconclusive (" + std::string(e.what()) + ")";
    return out;
  }
  for (int i = 0; i < sys.rank; ++i)
    for (int j = i + 1; j < sys.rank; ++j)
      out.commutation_max = std::max(out.commutation_max, out.coframe.commutator_residuals(i, j));
  if (out.commutation_max > 1e-6) {
    out.verdict = "inconclusive (flows do not commute at the anchor)";
    return out;
  }

  // Conservation and bracket drift along each generating flow.
  Eigen::VectorXd f0 = integral_values(sys, out.sample.anchor);
  Eigen::VectorXd b0(sys.rank * sys.num_integrals());
  auto brackets = [&](const Eigen::VectorXd& x, Eigen::VectorXd& bv) {
    int k = 0;
    for (int i = 0; i < sys.rank; ++i)
      for (int j = 0; j < sys.num_integrals(); ++j)
        bv[k++] = poisson_bracket(sys, sys.integrals[i], sys.integrals[j], x);
  };
  brackets(out.sample.anchor, b0);
  double span = std::min(search.t_max, 10.0);
  try {
    for (int i = 0; i < sys.rank; ++i) {
      Eigen::VectorXd bv(b0.size());
      auto monitor = [&](double, const Eigen::VectorXd& y) {
        out.conservation_drift =
            std::max(out.conservation_drift,
                     (integral_values(sys, y) - f0).cwiseAbs().maxCoeff());
        brackets(y, bv);
        out.bracket_drift =
            std::max(out.bracket_drift, (bv - b0).cwiseAbs().maxCoeff());
      };
      hamiltonian_flow(sys, i, span, out.sample.anchor, 1e-10, monitor);
    }
  } catch (const NumericError& e) {
    out.verdict = "inconclusive (" + std::string(e.what()) + ")";
    return out;
  }
  if (out.conservation_drift > 1e-6) {
    out.verdict = "inconclusive (integrals drift along the flows)";
    return out;
  }

  out.lattice = period_lattice(sys, out.sample, search);
  if (out.lattice.rank == sys.rank && out.lattice.coherence_residual <= 1e-5) {
    out.verdict = "torus T^" + std::to_string(sys.rank);
  } else if (!out.lattice.note.empty()) {
    out.verdict = "inconclusive (" + out.lattice.note + ")";
  } else {
    out.verdict = "inconclusive (return lattice is not coherent)";
  }
  return out;
}

}  // namespace toruscope
