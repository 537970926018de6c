#pragma once

#include <Eigen/Dense>

#include <array>
#include <map>
#include <string>
#include <vector>

#include "toruscope/errors.hpp"
#include "toruscope/exact.hpp"

namespace toruscope {

// Identification pattern for meshes whose vertex coordinates live in a
// fundamental domain.  Edge displacements are computed modulo the group.
enum class QuotientKind { None, Torus, Klein };

struct Quotient {
  QuotientKind kind = QuotientKind::None;
  std::vector<double> periods;  // per-axis period lengths
};

struct ValidationReport {
  bool closed_manifold = false;  // every ridge lies in exactly two top simplices
  bool oriented = false;         // induced orientations cancel across every ridge
  bool connected = false;        // 1-skeleton is connected
};

/// Triangulated n-manifold with vertex coordinates in R^d, d >= n.
///
/// Top simplices keep the vertex order they were given (their orientation);
/// all lower skeleta are stored as sorted vertex tuples in lexicographic
/// order, and cochain values index those lists.  Top-simplex lists are
/// reordered lexicographically by sorted tuple at construction.
class SimplicialComplex {
 public:
  SimplicialComplex(int dimension, std::vector<std::vector<double>> vertices,
                    std::vector<std::vector<int>> top_simplices, Quotient quotient = {});

  int dimension() const { return n_; }
  int ambient_dim() const { return d_; }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  const std::vector<double>& vertex(int v) const { return vertices_[v]; }
  const Quotient& quotient() const { return quotient_; }
  const ValidationReport& validation() const { return validation_; }

  int num_simplices(int p) const;
  /// Simplices of dimension p as sorted tuples, lexicographic order.
  const std::vector<std::vector<int>>& skeleton(int p) const;
  /// Index of a p-simplex given by any vertex order; -1 if absent.
  int simplex_index(int p, std::vector<int> verts) const;

  int num_tops() const { return static_cast<int>(tops_.size()); }
  /// Top simplex in stored (oriented) vertex order.
  const std::vector<int>& top(int t) const { return tops_[t]; }
  /// Parity of the stored order against the sorted tuple: +1 or -1.
  int top_orientation(int t) const { return top_sign_[t]; }

  const std::vector<std::array<int, 2>>& edges() const { return edges_; }
  /// Canonical edge index for {u, v}; throws InputError if absent.
  int edge_index(int u, int v) const;

  /// Displacement from u to v, shortest representative under the quotient.
  std::vector<double> displacement(int u, int v) const;
  /// Columns are the edge vectors from the first stored vertex of top t.
  Eigen::MatrixXd edge_vectors(int t) const;

 private:
  void build_skeletons();
  void validate_geometry();
  void compute_flags();

  int n_ = 0;
  int d_ = 0;
  std::vector<std::vector<double>> vertices_;
  std::vector<std::vector<int>> tops_;
  std::vector<int> top_sign_;
  Quotient quotient_;
  std::vector<std::vector<std::vector<int>>> skeleton_;       // per degree
  std::vector<std::map<std::vector<int>, int>> skeleton_map_;  // per degree
  std::vector<std::array<int, 2>> edges_;
  ValidationReport validation_;
};

/// Cochain: one value per p-simplex, indexed like skeleton(p).
/// Degree-n values pair with the stored orientation of each top simplex.
template <class T>
struct Cochain {
  int degree = 0;
  std::vector<T> values;
};

using IntCochain = Cochain<long long>;
using RealCochain = Cochain<double>;
using RatCochain = Cochain<Rat>;

RealCochain to_real(const RatCochain& c);
RealCochain to_real(const IntCochain& c);

/// Coboundary operator; integer and rational cochains stay exact.
template <class T>
Cochain<T> coboundary(const SimplicialComplex& m, const Cochain<T>& c);

struct ClosednessReport {
  bool closed = false;
  double residual = 0.0;  // max |dc| over 2-simplices
  int worst_simplex = -1;
};

ClosednessReport verify_closed(const SimplicialComplex& m, const RealCochain& c,
                               double tol = 1e-9);

/// Covector of a 1-cochain on top simplex t, written in the dual basis of
/// the spanning edges from the first stored vertex.  Entry i is the value
/// of c on the oriented edge (w0, wi).
Eigen::VectorXd edge_basis_components(const SimplicialComplex& m, const RealCochain& c,
                                      int t);

/// Same covector in ambient Cartesian coordinates; requires d == n.
Eigen::VectorXd cartesian_components(const SimplicialComplex& m, const RealCochain& c,
                                     int t);

struct IndependenceReport {
  int k = 0;
  double tol = 0.0;
  std::vector<Eigen::MatrixXd> component_matrices;  // k x n per top simplex
  std::vector<int> ranks;
  double min_singular_value = 0.0;  // min over tops of the k-th singular value
  int argmin_simplex = -1;
  bool pass = false;
};

/// Pointwise-independence certificate for k closed 1-cochains: on every top
/// simplex the k x n component matrix must have rank k (singular values
/// measured against tol).
IndependenceReport independence_report(const SimplicialComplex& m,
                                       const std::vector<RealCochain>& forms,
                                       double tol = 1e-9);

}  // namespace toruscope
