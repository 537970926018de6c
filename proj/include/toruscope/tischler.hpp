#pragma once

#include <string>
#include <vector>

#include "toruscope/cohomology.hpp"
#include "toruscope/exact.hpp"
#include "toruscope/mesh.hpp"

namespace toruscope {

/// Rational approximations of the decomposition coefficients together with
/// the integer scaling that turns them into winding numbers.
struct TischlerCoefficients {
  std::vector<std::vector<double>> a;       // k x p original coefficients
  MatQ q;                                   // k x p rational approximations
  std::vector<long long> scale;             // N_i = lcm of row denominators
  std::vector<std::vector<long long>> kmat;  // k_ij = N_i * q_ij
  double eps_requested = 0.0;
  double eps_threshold = 0.0;  // tolerance after halving
  double eps_used = 0.0;       // max |q_ij - a_ij| actually incurred
  int halvings = 0;
  IndependenceReport perturbed;  // independence of the perturbed forms
};

TischlerCoefficients rationalize(const SimplicialComplex& m, const CohomologyBasis& basis,
                                 const std::vector<Decomposition>& decomps, double eps0,
                                 double independence_tol = 1e-9);

/// Fills scale/kmat from q.  Kept separate so the scaling step is testable
/// on its own.
void integerize(TischlerCoefficients& tc);

/// The torus-valued map: each circle factor is the mod-1 tree integral of an
/// exact rational combination of basis representatives plus a rescaled
/// potential.  The combination cochain is stored exactly so edge increments
/// and periods never pick up rounding error.
struct FibrationMap {
  int k = 0;
  int base_vertex = 0;
  std::vector<std::vector<long long>> kmat;
  std::vector<long long> scale;
  std::vector<RatCochain> combo;            // degree 1, exact
  std::vector<RatCochain> combo_potential;  // degree 0, exact tree integral
  std::vector<RealCochain> scaled_potential;  // degree 0, N_i * F_i

  double lift(int v, int i) const;   // unwrapped value of circle factor i
  double theta(int v, int i) const;  // lift reduced mod 1 into [0, 1)
  RealCochain increment(const SimplicialComplex& m, int i) const;  // edge increments of factor i
};

FibrationMap build_fibration_map(const SimplicialComplex& m, const CohomologyBasis& basis,
                                 const std::vector<std::vector<long long>>& kmat,
                                 const std::vector<std::vector<long long>>& scale_or_empty,
                                 const std::vector<RealCochain>& potentials);

struct FibrationCertificate {
  int k = 0;
  int bins = 16;
  IndependenceReport rank;
  std::vector<int> offending;  // top simplices where the differential drops rank
  long long cells_total = 0;
  long long cells_hit = 0;
  long long samples = 0;
  double coverage = 0.0;
  bool covered = false;
  int regular_values = 0;                // values that passed the guard band
  std::vector<long long> fiber_counts;   // preimage count per accepted value
  bool fiber_constant = false;
  long long degree = -1;  // constant preimage count when k == n
  std::string verdict;
  bool pass = false;
};

struct VerifyOptions {
  int bins = 16;
  double rank_tol = 1e-9;
  double guard = 1e-6;  // regular values this close to a simplex image boundary are skipped
};

FibrationCertificate verify_fibration(const SimplicialComplex& m, const FibrationMap& fib,
                                      const VerifyOptions& opts = {});

struct CoveringReport {
  long long degree = -1;
  bool consistent = false;
  std::string statement;
};

CoveringReport covering_report(const SimplicialComplex& m, const FibrationCertificate& cert);

/// End-to-end pipeline: closedness, pointwise independence, cohomology
/// basis, decomposition, rationalization, integer scaling, map construction,
/// certification.  Failures are recorded with the stage that produced them;
/// exit_code follows the CLI convention (0 ok, 1 negative verdict, 3
/// numerical failure).  Input errors throw.
struct TischlerResult {
  std::vector<ClosednessReport> closedness;
  IndependenceReport independence;
  bool has_independence = false;
  int betti = -1;
  std::vector<Decomposition> decomps;
  TischlerCoefficients coeffs;
  bool has_coeffs = false;
  FibrationCertificate cert;
  bool has_cert = false;
  CoveringReport covering;
  bool has_covering = false;
  std::string failure_stage;  // empty when the pipeline completed
  std::string failure_message;
  int exit_code = 0;
};

struct PipelineOptions {
  double eps = 1e-4;
  int bins = 16;
  double closed_tol = 1e-9;
  double independence_tol = 1e-9;
  double decompose_tol = 1e-9;
};

TischlerResult tischler_pipeline(const SimplicialComplex& m,
                                 const std::vector<RealCochain>& forms,
                                 const PipelineOptions& opts = {});

}  // namespace toruscope
