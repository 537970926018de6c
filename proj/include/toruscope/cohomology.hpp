#pragma once

#include <utility>
#include <vector>

#include "toruscope/exact.hpp"
#include "toruscope/mesh.hpp"

namespace toruscope {

/// A 1-cycle stored as a list of (edge index, sign) steps.  The sign is +1
/// when the cycle traverses the canonical edge (u, v) from u to v.
struct Cycle {
  std::vector<std::pair<int, int>> steps;
};

/// Spanning tree of the 1-skeleton plus the fundamental cycle of every
/// non-tree edge ("chord").  The tree is grown breadth-first from vertex 0
/// scanning edges in canonical order, so the construction is deterministic.
struct CycleBasis {
  std::vector<int> parent;       // parent vertex in tree, -1 at root
  std::vector<int> parent_edge;  // canonical edge index to parent, -1 at root
  std::vector<int> order;        // BFS discovery order of vertices
  std::vector<int> chords;       // canonical edge indices outside the tree
  std::vector<Cycle> cycles;     // fundamental cycle per chord, same order
};

CycleBasis cycle_basis(const SimplicialComplex& m);

template <class T>
T period_over(const Cochain<T>& c, const Cycle& cycle) {
  T sum = T(0);
  for (auto [e, s] : cycle.steps) {
    if (s > 0) sum += c.values[e];
    else sum -= c.values[e];
  }
  return sum;
}

/// Integrates a 1-cochain over tree paths from the root: returns the unique
/// 0-cochain F with F(root) = 0 and dF = c on tree edges.
template <class T>
Cochain<T> tree_integrate(const SimplicialComplex& m, const CycleBasis& basis,
                          const Cochain<T>& c);

/// Rank-one summary of H^1: a preferred set of fundamental cycles together
/// with closed rational representatives whose periods over those cycles form
/// the identity matrix exactly.
struct CohomologyBasis {
  CycleBasis cycles;
  int betti = 0;
  std::vector<int> selected;        // indices into cycles.chords, size betti
  std::vector<RatCochain> reps;     // closed, integer periods, size betti
  MatZ periods_all;                 // betti x num_chords, periods of reps over all cycles
};

CohomologyBasis h1_basis(const SimplicialComplex& m);

int betti1(const SimplicialComplex& m);

/// beta = sum_j coefficients[j] * reps[j] + d(potential), with potential(root) = 0.
struct Decomposition {
  std::vector<double> coefficients;
  RealCochain potential;
  double residual = 0.0;
};

Decomposition decompose(const SimplicialComplex& m, const CohomologyBasis& basis,
                        const RealCochain& beta, double tol = 1e-9);

RealCochain assemble(const SimplicialComplex& m, const CohomologyBasis& basis,
                     const std::vector<double>& coefficients, const RealCochain& potential);

}  // namespace toruscope
