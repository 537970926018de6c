#pragma once

#include "toruscope/ode.hpp"
#include "toruscope/system.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace toruscope {

/// A point on a joint level set of the integrals, found by Gauss-Newton
/// projection from a user guess, together with regularity data at it.
struct LevelSetSample {
  Eigen::VectorXd level;
  Eigen::VectorXd anchor;
  double residual = 0.0;
  int iterations = 0;
  int jacobian_rank = 0;
  int bivector_rank = 0;
};

/// Projects the guess onto {F = level}.  Throws NumericError if the iteration
/// does not converge or the level is not regular at the landing point.
LevelSetSample project_to_level(const SystemDefinition& sys, const Eigen::VectorXd& level,
                                const Eigen::VectorXd& guess, double tol = 1e-10,
                                int max_iter = 100);

/// Time-t flow of the Hamiltonian field of integral `field` from x.
Eigen::VectorXd hamiltonian_flow(const SystemDefinition& sys, int field, double t,
                                 const Eigen::VectorXd& x, double ode_tol = 1e-10,
                                 const std::function<void(double, const Eigen::VectorXd&)>&
                                     monitor = {});

/// Composition of the flows of fields 0..r-1; the highest index acts first,
/// so joint_flow(t) = Phi_0^{t_0}(Phi_1^{t_1}(... Phi_{r-1}^{t_{r-1}}(x))).
Eigen::VectorXd joint_flow(const SystemDefinition& sys, const Eigen::VectorXd& t,
                           const Eigen::VectorXd& x);

/// | Phi_i^t Phi_j^s x - Phi_j^s Phi_i^t x |.
double commutation_residual(const SystemDefinition& sys, int i, int j,
                            const Eigen::VectorXd& x, double t, double s);

struct DualCoframe {
  Eigen::MatrixXd fields;     // dim x r, column i = X_{f_i} at the anchor
  Eigen::MatrixXd coframe;    // r x dim, rows beta_i with <beta_i, X_j> = delta_ij
  double pairing_residual = 0.0;
  Eigen::MatrixXd commutator_residuals;  // r x r, flow commutation at t = s = 0.1
};

/// Builds the dual coframe beta = (X^T X)^{-1} X^T at the anchor.  Throws
/// NumericError when the fields are dependent there.
DualCoframe dual_coframe(const SystemDefinition& sys, const LevelSetSample& sample);

struct LatticeSearch {
  double t_max = 20.0;
  int grid = 64;  // intervals per axis on [0, t_max]
  double return_tol = 1e-8;
};

struct PeriodLattice {
  std::vector<Eigen::VectorXd> returns;      // refined return times, sorted
  std::vector<double> return_residuals;      // |Phi_t(m) - m| for each
  std::vector<Eigen::VectorXd> basis;        // greedy rank-increasing subset
  std::vector<double> basis_residuals;
  int rank = 0;
  double coherence_residual = 0.0;  // max distance of returns from integer basis combos
  std::string note;
};

/// Scans the joint flow over a time grid, refines distance minima by
/// Gauss-Newton, and extracts a basis of the lattice of return times.
PeriodLattice period_lattice(const SystemDefinition& sys, const LevelSetSample& sample,
                             const LatticeSearch& search = {});

struct FiberVerdict {
  ClassificationVerdict classification;
  bool projected = false;
  LevelSetSample sample;
  bool coframe_ok = false;
  DualCoframe coframe;
  double commutation_max = 0.0;
  double conservation_drift = 0.0;
  double bracket_drift = 0.0;
  PeriodLattice lattice;
  std::string verdict;  // "torus T^r" or "inconclusive (reason)"
};

/// Full certification chain: classify the system, project to the level,
/// build the coframe, monitor conservation along the flows, and search for
/// the period lattice.  Never claims "not a torus"; any failed gate yields
/// an inconclusive verdict naming the gate.
FiberVerdict fiber_verdict(const SystemDefinition& sys, const Eigen::VectorXd& level,
                           const std::vector<Eigen::VectorXd>& guesses,
                           const LatticeSearch& search = {}, int samples = 1000,
                           unsigned long long seed = 0);

}  // namespace toruscope
