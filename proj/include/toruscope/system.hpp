#pragma once

#include "toruscope/expression.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <array>
#include <string>
#include <vector>

namespace toruscope {

using json = nlohmann::ordered_json;

/// A Poisson system on a coordinate box: either the canonical symplectic
/// structure on R^{2n} with coordinates (q_1..q_n, p_1..p_n) or an explicit
/// bivector given by its upper-triangle entries, plus a list of conserved
/// quantities and the expected involutive rank r.
struct SystemDefinition {
  int dim = 0;
  bool canonical = true;
  /// Upper triangle of the bivector, row i holding entries (i, i+1)..(i, dim),
  /// 0-based; empty when canonical.
  std::vector<std::vector<Expression>> bivector;
  std::vector<Expression> integrals;
  int rank = 0;
  std::vector<std::array<double, 2>> box;

  int num_integrals() const { return static_cast<int>(integrals.size()); }
  bool inside_box(const Eigen::VectorXd& x, double slack = 0.0) const;
};

SystemDefinition system_from_json(const json& doc);

/// Bivector matrix at a point (antisymmetric dim x dim).
Eigen::MatrixXd bivector_at(const SystemDefinition& sys, const Eigen::VectorXd& x);

double poisson_bracket(const SystemDefinition& sys, const Expression& f, const Expression& g,
                       const Eigen::VectorXd& x);

/// X_f with components X^i = sum_j Pi^{ij} d_j f.
Eigen::VectorXd hamiltonian_field(const SystemDefinition& sys, const Expression& f,
                                  const Eigen::VectorXd& x);

/// Rows are the gradients of the integrals (s x dim).
Eigen::MatrixXd integral_jacobian(const SystemDefinition& sys, const Eigen::VectorXd& x);

Eigen::VectorXd integral_values(const SystemDefinition& sys, const Eigen::VectorXd& x);

/// Max over the given points and index triples i<j<k of the cyclic sum
///   sum_l (Pi^{li} d_l Pi^{jk} + Pi^{lj} d_l Pi^{ki} + Pi^{lk} d_l Pi^{ij}).
/// Identically zero for constant structures, so canonical systems return 0.
double jacobi_residual(const SystemDefinition& sys, const std::vector<Eigen::VectorXd>& points);

/// Max |{f_i, f_j}| over pairs i<j with i below the involutive rank.
double involution_residual(const SystemDefinition& sys,
                           const std::vector<Eigen::VectorXd>& points);

std::vector<Eigen::VectorXd> sample_box(const SystemDefinition& sys, int count,
                                        unsigned long long seed);

struct ClassificationVerdict {
  int dim = 0;
  int s = 0;  // number of integrals
  int r = 0;  // involutive rank
  double jacobi_max = 0.0;
  double involution_max = 0.0;
  double regular_fraction = 0.0;
  int generic_rank = 0;
  std::string verdict;
  bool integrable = false;
};

/// Runs the hypothesis checks in order: Jacobi identity, pairwise involution,
/// the count r + s == dim, regularity on at least 95% of sampled points, and
/// the bound rank(Pi) <= 2r.  The first failure decides the verdict.
ClassificationVerdict classify_system(const SystemDefinition& sys, int samples = 1000,
                                      unsigned long long seed = 0);

}  // namespace toruscope
