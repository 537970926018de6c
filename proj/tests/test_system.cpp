#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "toruscope/errors.hpp"
#include "toruscope/mesh_io.hpp"
#include "toruscope/ode.hpp"
#include "toruscope/system.hpp"

#include <cmath>

using namespace toruscope;

namespace {

SystemDefinition load_system(const std::string& path) {
  return system_from_json(load_json_file(path));
}

json minimal_canonical() {
  return json::parse(R"({
    "dimension": 2,
    "structure": {"kind": "canonical"},
    "integrals": ["(x1^2+x2^2)/2"],
    "rank": 1,
    "box": [[-2, 2], [-2, 2]]
  })");
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<int>(v.size()));
  int i = 0;
  for (double t : v) x[i++] = t;
  return x;
}

}  // namespace

TEST_CASE("canonical bivector pairs each q with its p") {
  SystemDefinition sys = system_from_json(minimal_canonical());
  Eigen::MatrixXd pi = bivector_at(sys, vec({0.3, -0.7}));
  CHECK(pi(0, 1) == 1.0);
  CHECK(pi(1, 0) == -1.0);
  CHECK(pi(0, 0) == 0.0);
  CHECK(pi(1, 1) == 0.0);
  // harmonic oscillator: X_H = (p, -q)
  Eigen::VectorXd f = hamiltonian_field(sys, sys.integrals[0], vec({0.3, -0.7}));
  CHECK(f[0] == doctest::Approx(-0.7).epsilon(1e-15));
  CHECK(f[1] == doctest::Approx(-0.3).epsilon(1e-15));
}

TEST_CASE("angular momentum bivector and its Casimir") {
  SystemDefinition sys = load_system("data/so3.json");
  REQUIRE_FALSE(sys.canonical);
  Eigen::VectorXd x = vec({0.4, -1.1, 0.9});
  Eigen::MatrixXd pi = bivector_at(sys, x);
  CHECK(pi(0, 1) == -x[2]);
  CHECK(pi(0, 2) == x[1]);
  CHECK(pi(1, 2) == -x[0]);
  CHECK(pi(1, 0) == x[2]);
  CHECK(pi.diagonal().norm() == 0.0);

  // X_{x3} rotates the (x1, x2) plane
  Expression x3 = Expression::parse("x3");
  Eigen::VectorXd f = hamiltonian_field(sys, x3, x);
  CHECK(f[0] == doctest::Approx(x[1]).epsilon(1e-15));
  CHECK(f[1] == doctest::Approx(-x[0]).epsilon(1e-15));
  CHECK(f[2] == 0.0);

  // the squared radius is a Casimir: brackets with anything vanish
  Expression cas = Expression::parse("x1^2+x2^2+x3^2");
  CHECK(std::abs(poisson_bracket(sys, x3, cas, x)) < 1e-14);
  Expression probe = Expression::parse("x1*x2+sin(x3)");
  CHECK(std::abs(poisson_bracket(sys, probe, cas, x)) < 1e-14);
}

TEST_CASE("Jacobi residual vanishes for linear structures and flags broken ones") {
  SystemDefinition so3 = load_system("data/so3.json");
  std::vector<Eigen::VectorXd> pts = sample_box(so3, 50, 1);
  CHECK(jacobi_residual(so3, pts) == 0.0);

  SystemDefinition osc = load_system("data/oscillator.json");
  CHECK(jacobi_residual(osc, sample_box(osc, 50, 1)) == 0.0);

  // bivector rows [["x1","x2"],["1"]]: the cyclic sum at a point reduces to x2
  SystemDefinition bad = load_system("data/broken_bivector.json");
  Eigen::VectorXd p = vec({1.0, 1.0, 1.0});
  CHECK(jacobi_residual(bad, {p}) == 1.0);
  Eigen::VectorXd p2 = vec({0.3, -1.7, 0.5});
  CHECK(jacobi_residual(bad, {p2}) == doctest::Approx(1.7).epsilon(1e-15));
}

TEST_CASE("involution residual pairs only below the involutive rank") {
  SystemDefinition osc = load_system("data/oscillator.json");
  std::vector<Eigen::VectorXd> pts = sample_box(osc, 100, 2);
  CHECK(involution_residual(osc, pts) < 1e-14);

  SystemDefinition so3 = load_system("data/so3.json");
  CHECK(involution_residual(so3, sample_box(so3, 100, 2)) < 1e-14);
}

TEST_CASE("classification of the bundled catalog") {
  ClassificationVerdict osc = classify_system(load_system("data/oscillator.json"));
  CHECK(osc.verdict == "commutative Liouville");
  CHECK(osc.integrable);
  CHECK(osc.r == 2);
  CHECK(osc.s == 2);
  CHECK(osc.jacobi_max == 0.0);
  CHECK(osc.involution_max < 1e-12);
  CHECK(osc.generic_rank == 4);

  ClassificationVerdict ani = classify_system(load_system("data/anisotropic_oscillator.json"));
  CHECK(ani.verdict == "commutative Liouville");
  CHECK(ani.integrable);

  ClassificationVerdict so3 = classify_system(load_system("data/so3.json"));
  CHECK(so3.verdict == "non-commutative rank 1");
  CHECK(so3.integrable);
  CHECK(so3.r == 1);
  CHECK(so3.s == 2);
  CHECK(so3.generic_rank == 2);

  ClassificationVerdict bad = classify_system(load_system("data/broken_bivector.json"));
  CHECK(bad.verdict == "not integrable (Jacobi identity fails)");
  CHECK_FALSE(bad.integrable);
  CHECK(bad.jacobi_max > 0.1);
}

TEST_CASE("integral jacobian rows are the gradients") {
  SystemDefinition osc = load_system("data/oscillator.json");
  Eigen::VectorXd x = vec({0.5, -0.25, 1.0, 0.75});
  Eigen::MatrixXd jac = integral_jacobian(osc, x);
  REQUIRE(jac.rows() == 2);
  REQUIRE(jac.cols() == 4);
  // F1 = (x1^2+x3^2)/2, F2 = (x2^2+x4^2)/2
  CHECK(jac(0, 0) == 0.5);
  CHECK(jac(0, 2) == 1.0);
  CHECK(jac(0, 1) == 0.0);
  CHECK(jac(1, 1) == -0.25);
  CHECK(jac(1, 3) == 0.75);
  Eigen::VectorXd vals = integral_values(osc, x);
  CHECK(vals[0] == doctest::Approx(0.625).epsilon(1e-15));
}

TEST_CASE("box sampling is deterministic and stays inside") {
  SystemDefinition osc = load_system("data/oscillator.json");
  auto a = sample_box(osc, 25, 7);
  auto b = sample_box(osc, 25, 7);
  auto c = sample_box(osc, 25, 8);
  REQUIRE(a.size() == 25);
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK((a[i].array() == b[i].array()).all());
    CHECK(osc.inside_box(a[i]));
  }
  bool all_equal = true;
  for (size_t i = 0; i < a.size(); ++i)
    if (!(a[i].array() == c[i].array()).all()) all_equal = false;
  CHECK_FALSE(all_equal);
}

TEST_CASE("system documents are validated field by field") {
  json base = minimal_canonical();

  json d = base;
  d.erase("dimension");
  CHECK_THROWS_AS(system_from_json(d), InputError);

  d = base;
  d["dimension"] = 3;
  CHECK_THROWS_WITH_AS(system_from_json(d), "canonical structure requires an even dimension",
                       InputError);

  d = base;
  d["structure"]["kind"] = "symplectic";
  CHECK_THROWS_WITH_AS(system_from_json(d), "structure kind must be \"canonical\" or \"poisson\"",
                       InputError);

  d = base;
  d["integrals"] = json::array();
  CHECK_THROWS_AS(system_from_json(d), InputError);

  d = base;
  d["integrals"] = {"x1+x5"};
  CHECK_THROWS_AS(system_from_json(d), InputError);  // x5 exceeds the dimension

  d = base;
  d["rank"] = 2;
  CHECK_THROWS_WITH_AS(system_from_json(d), "rank must lie between 1 and the number of integrals",
                       InputError);

  d = base;
  d["box"] = {{-2, 2}};
  CHECK_THROWS_AS(system_from_json(d), InputError);

  d = base;
  d["box"] = {{-2, 2}, {2, -2}};
  CHECK_THROWS_WITH_AS(system_from_json(d), "box entry 1 must have lo < hi", InputError);

  d = base;
  d["structure"] = {{"kind", "poisson"}, {"bivector", json::array()}};
  CHECK_THROWS_WITH_AS(system_from_json(d),
                       "bivector must have dimension-1 rows of upper-triangle entries",
                       InputError);
}

TEST_CASE("integrator reproduces the rotation flow") {
  auto f = [](const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    dy.resize(2);
    dy[0] = y[1];
    dy[1] = -y[0];
  };
  Eigen::VectorXd y0 = vec({1.0, 0.0});
  Eigen::VectorXd y = integrate(f, y0, M_PI / 2);
  CHECK(y[0] == doctest::Approx(0.0).scale(1).epsilon(1e-9));
  CHECK(y[1] == doctest::Approx(-1.0).epsilon(1e-9));
  y = integrate(f, y0, -M_PI);
  CHECK(y[0] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(y[1] == doctest::Approx(0.0).scale(1).epsilon(1e-9));
  y = integrate(f, y0, 20 * M_PI);
  CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("integration to zero or tiny times returns the start point") {
  auto f = [](const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy = y; };
  Eigen::VectorXd y0 = vec({0.5, -1.5});
  CHECK((integrate(f, y0, 0.0).array() == y0.array()).all());
  // a target below the step floor must not trip the underflow guard
  CHECK((integrate(f, y0, 1e-18).array() == y0.array()).all());
  CHECK((integrate(f, y0, -1e-18).array() == y0.array()).all());
}

TEST_CASE("integration aborts when the trajectory leaves the box") {
  auto f = [](const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy = y; };
  std::vector<std::array<double, 2>> box = {{-2.0, 2.0}};
  OdeOptions opts;
  opts.box = &box;
  opts.box_slack = 0.0;
  Eigen::VectorXd y0(1);
  y0 << 1.0;
  CHECK_THROWS_AS(integrate(f, y0, 3.0, opts), NumericError);
  CHECK(integrate(f, y0, 0.5, opts)[0] == doctest::Approx(std::exp(0.5)).epsilon(1e-9));
}

TEST_CASE("monitor sees every accepted step in order") {
  auto f = [](const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy = -y; };
  OdeOptions opts;
  std::vector<double> times;
  opts.monitor = [&](double t, const Eigen::VectorXd&) { times.push_back(t); };
  Eigen::VectorXd y0(1);
  y0 << 1.0;
  integrate(f, y0, 2.0, opts);
  REQUIRE_FALSE(times.empty());
  for (size_t i = 1; i < times.size(); ++i) CHECK(times[i] > times[i - 1]);
  CHECK(times.back() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("energy is conserved along a Hamiltonian flow") {
  SystemDefinition osc = load_system("data/oscillator.json");
  auto f = [&](const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    dy = hamiltonian_field(osc, osc.integrals[0], y);
  };
  Eigen::VectorXd y0 = vec({0.8, 0.3, -0.4, 0.9});
  double e0 = osc.integrals[0].value(y0);
  Eigen::VectorXd y = integrate(f, y0, 12.0);
  CHECK(osc.integrals[0].value(y) == doctest::Approx(e0).epsilon(1e-8));
}
