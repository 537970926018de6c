#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "toruscope/errors.hpp"
#include "toruscope/mesh_io.hpp"
#include "toruscope/torus_detect.hpp"

#include <cmath>

using namespace toruscope;

namespace {

SystemDefinition load_system(const std::string& path) {
  return system_from_json(load_json_file(path));
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<int>(v.size()));
  int i = 0;
  for (double t : v) x[i++] = t;
  return x;
}

}  // namespace

TEST_CASE("projection accepts a point already on the level") {
  SystemDefinition osc = load_system("data/oscillator.json");
  Eigen::VectorXd guess = vec({1.0, 1.0, 0.0, 0.0});  // F = (1/2, 1/2) exactly
  LevelSetSample s = project_to_level(osc, vec({0.5, 0.5}), guess);
  CHECK(s.iterations == 0);
  CHECK(s.residual <= 1e-10);
  CHECK((s.anchor.array() == guess.array()).all());
  CHECK(s.jacobian_rank == 2);
}

TEST_CASE("projection walks onto the level and certifies regularity") {
  SystemDefinition osc = load_system("data/oscillator.json");
  LevelSetSample s = project_to_level(osc, vec({0.5, 0.5}), vec({1.3, 0.6, -0.4, 0.8}));
  Eigen::VectorXd vals = integral_values(osc, s.anchor);
  CHECK(vals[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(vals[1] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(s.iterations > 0);
  CHECK(s.jacobian_rank == 2);
}

TEST_CASE("projection rejects a level that is singular at the landing point") {
  SystemDefinition osc = load_system("data/oscillator.json");
  // F1 = 0 forces x1 = x3 = 0 where dF1 vanishes
  CHECK_THROWS_WITH_AS(project_to_level(osc, vec({0.0, 0.5}), vec({0.0, 1.0, 0.0, 0.0})),
                       "anchor not regular (integral gradients are dependent at the level)",
                       NumericError);
}

TEST_CASE("Hamiltonian flow of the Casimir radius is a rotation") {
  SystemDefinition so3 = load_system("data/so3.json");
  // field 0 is x3: its flow spins (x1, x2) with angular velocity 1
  Eigen::VectorXd x = vec({1.0, 0.0, 2.0});
  Eigen::VectorXd y = hamiltonian_flow(so3, 0, M_PI, x);
  CHECK(y[0] == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(y[1] == doctest::Approx(0.0).scale(1).epsilon(1e-8));
  CHECK(y[2] == doctest::Approx(2.0).epsilon(1e-12));
  y = hamiltonian_flow(so3, 0, 2 * M_PI, x);
  CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("joint flow applies the highest index first") {
  SystemDefinition osc = load_system("data/oscillator.json");
  Eigen::VectorXd x = vec({0.9, 0.2, 0.1, -0.5});
  Eigen::VectorXd t = vec({0.7, 1.3});
  Eigen::VectorXd direct = joint_flow(osc, t, x);
  Eigen::VectorXd chained = hamiltonian_flow(osc, 0, 0.7, hamiltonian_flow(osc, 1, 1.3, x));
  CHECK((direct - chained).norm() < 1e-9);
}

TEST_CASE("commuting and non-commuting flows are told apart") {
  SystemDefinition osc = load_system("data/oscillator.json");
  Eigen::VectorXd x = vec({0.9, 0.2, 0.1, -0.5});
  CHECK(commutation_residual(osc, 0, 1, x, 0.4, 0.8) < 1e-8);

  // canonical plane with f = x1 (translation of x2... wait, of the momentum)
  // and g = x2^2/2 (shear): the flows fail to commute by exactly |t*s|
  json doc = json::parse(R"({
    "dimension": 2,
    "structure": {"kind": "canonical"},
    "integrals": ["x1", "x2^2/2"],
    "rank": 1,
    "box": [[-5, 5], [-5, 5]]
  })");
  SystemDefinition shear = system_from_json(doc);
  double r = commutation_residual(shear, 0, 1, vec({0.3, 0.4}), 0.3, 0.5);
  CHECK(r == doctest::Approx(0.15).epsilon(1e-7));
}

TEST_CASE("dual coframe pairs with the fields as an identity") {
  SystemDefinition osc = load_system("data/oscillator.json");
  LevelSetSample s = project_to_level(osc, vec({0.5, 0.5}), vec({1.0, 1.0, 0.0, 0.0}));
  DualCoframe cf = dual_coframe(osc, s);
  REQUIRE(cf.fields.cols() == 2);
  Eigen::MatrixXd pairing = cf.coframe * cf.fields;
  CHECK((pairing - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(cf.pairing_residual < 1e-12);
  CHECK(cf.commutator_residuals.cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("dual coframe rejects dependent fields") {
  // two copies of the same integral give parallel Hamiltonian fields
  json doc = json::parse(R"({
    "dimension": 2,
    "structure": {"kind": "canonical"},
    "integrals": ["(x1^2+x2^2)/2", "x1^2+x2^2"],
    "rank": 2,
    "box": [[-2, 2], [-2, 2]]
  })");
  SystemDefinition sys = system_from_json(doc);
  LevelSetSample s;
  s.level = vec({0.5, 1.0});
  s.anchor = vec({1.0, 0.0});
  CHECK_THROWS_AS(dual_coframe(sys, s), NumericError);
}

TEST_CASE("period lattice of the isotropic oscillator is square") {
  SystemDefinition osc = load_system("data/oscillator.json");
  LevelSetSample s = project_to_level(osc, vec({0.5, 0.5}), vec({1.0, 1.0, 0.0, 0.0}));
  LatticeSearch search;
  search.t_max = 8.0;
  search.grid = 24;
  PeriodLattice lat = period_lattice(osc, s, search);
  REQUIRE(lat.rank == 2);
  const double tau = 2 * M_PI;
  Eigen::MatrixXd b(2, 2);
  b.col(0) = lat.basis[0];
  b.col(1) = lat.basis[1];
  // basis vectors are (2pi, 0) and (0, 2pi) in some order and orientation
  for (int j = 0; j < 2; ++j) {
    Eigen::VectorXd v = b.col(j).cwiseAbs();
    double big = v.maxCoeff(), small = v.minCoeff();
    CHECK(big == doctest::Approx(tau).epsilon(1e-6));
    CHECK(small < 1e-6);
  }
  CHECK(std::abs(std::abs(b.determinant()) - tau * tau) < 1e-4);
  CHECK(lat.coherence_residual < 1e-5);
  for (double r : lat.return_residuals) CHECK(r < 1e-6);
}

TEST_CASE("lattice search reports when no return is found") {
  SystemDefinition osc = load_system("data/oscillator.json");
  LevelSetSample s = project_to_level(osc, vec({0.5, 0.5}), vec({1.0, 1.0, 0.0, 0.0}));
  LatticeSearch search;
  search.t_max = 2.0;  // shorter than the fundamental period
  search.grid = 16;
  PeriodLattice lat = period_lattice(osc, s, search);
  CHECK(lat.rank == 0);
  CHECK(lat.returns.empty());
  CHECK(lat.note == "no returns found within t_max (enlarge t_max or refine the grid)");
}

TEST_CASE("full verdict for the rotation group level") {
  SystemDefinition so3 = load_system("data/so3.json");
  FiberVerdict v = fiber_verdict(so3, vec({1.0, 4.0}), {vec({1.5, 0.5, 1.0})});
  CHECK(v.classification.verdict == "non-commutative rank 1");
  CHECK(v.projected);
  CHECK(v.coframe_ok);
  CHECK(v.commutation_max <= 1e-6);
  CHECK(v.conservation_drift <= 1e-6);
  CHECK(v.bracket_drift <= 1e-6);
  REQUIRE(v.verdict == "torus T^1");
  REQUIRE(v.lattice.rank == 1);
  CHECK(v.lattice.basis[0][0] == doctest::Approx(2 * M_PI).epsilon(1e-6));
}

TEST_CASE("verdict goes inconclusive when classification fails") {
  SystemDefinition bad = load_system("data/broken_bivector.json");
  FiberVerdict v = fiber_verdict(bad, vec({0.5}), {vec({0.5, 0.5, 0.5})});
  CHECK(v.verdict.rfind("inconclusive", 0) == 0);
  CHECK(v.verdict.find("Jacobi") != std::string::npos);
}

TEST_CASE("verdict goes inconclusive at a singular level") {
  SystemDefinition osc = load_system("data/oscillator.json");
  FiberVerdict v = fiber_verdict(osc, vec({0.0, 0.5}), {vec({0.0, 1.0, 0.0, 0.0})});
  CHECK(v.classification.integrable);
  CHECK_FALSE(v.projected);
  CHECK(v.verdict.rfind("inconclusive", 0) == 0);
}
