#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "toruscope/errors.hpp"
#include "toruscope/meshgen.hpp"
#include "toruscope/tischler.hpp"

#include <cmath>
#include <random>

using namespace toruscope;

namespace {

// Oracle for rational approximation: extract the full partial-quotient list
// with the Euclidean algorithm, then evaluate each prefix as a nested
// fraction from the back.  Returns the first prefix within eps of x.
// Structured differently from the library routine on purpose.
Rat cf_oracle(const Rat& x, const Rat& eps) {
  Rat t = abs(x);
  std::vector<Int> quots;
  Int n = t.get_num(), d = t.get_den();
  while (d != 0) {
    Int q, r;
    mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
    quots.push_back(q);
    n = d;
    d = r;
  }
  for (size_t m = 0; m < quots.size(); ++m) {
    Rat v(quots[m]);
    for (size_t i = m; i-- > 0;) v = Rat(quots[i]) + Rat(1) / v;
    v.canonicalize();
    if (abs(t - v) <= eps) return sgn(x) < 0 ? Rat(-v) : v;
  }
  return sgn(x) < 0 ? Rat(-t) : t;
}

RealCochain zero_potential(const SimplicialComplex& m) {
  RealCochain f;
  f.degree = 0;
  f.values.assign(m.num_vertices(), 0.0);
  return f;
}

}  // namespace

TEST_CASE("rational approximation agrees with the convergent oracle") {
  struct Case {
    double x;
    double eps;
    long num, den;
  };
  std::vector<Case> cases = {
      {0.3, 1e-4, 3, 10},   {1.7, 1e-4, 17, 10},  {0.25, 1e-4, 1, 4},
      {-0.75, 1e-4, -3, 4}, {0.51, 0.02, 1, 2},   {0.49, 0.02, 1, 2},
      {5.0, 1e-6, 5, 1},    {0.0, 1e-6, 0, 1},    {-0.3, 1e-4, -3, 10},
  };
  for (const Case& c : cases) {
    Rat got = continued_fraction_approx(Rat(c.x), Rat(c.eps));
    CHECK(got == ratq(c.num, c.den));
    CHECK(got == cf_oracle(Rat(c.x), Rat(c.eps)));
  }
}

TEST_CASE("exact rationals below the Farey gap are recovered verbatim") {
  std::mt19937_64 gen(7);
  Rat eps = Rat(1) / Rat(1000000000000L);
  for (int trial = 0; trial < 200; ++trial) {
    long den = 2 + static_cast<long>(gen() % 999);
    long num = 1 + static_cast<long>(gen() % (3 * den));
    if (gen() & 1) num = -num;
    Rat x = ratq(num, den);
    CHECK(continued_fraction_approx(x, eps) == x);
    CHECK(cf_oracle(x, eps) == x);
  }
}

TEST_CASE("library and oracle agree on random doubles at assorted tolerances") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 100; ++trial) {
    double x = (static_cast<double>(gen() >> 11) * 0x1.0p-53) * 4.0 - 2.0;
    for (double eps : {1e-2, 1e-4, 1e-8}) {
      Rat got = continued_fraction_approx(Rat(x), Rat(eps));
      CHECK(got == cf_oracle(Rat(x), Rat(eps)));
      CHECK(std::abs(got.get_d() - x) <= eps * (1 + 1e-12));
    }
  }
}

TEST_CASE("integer scaling clears denominators row by row") {
  TischlerCoefficients tc;
  tc.q = {{ratq(1, 2), ratq(1, 3), ratq(1, 5)}, {ratq(1, 4), ratq(3, 2)},
          {ratq(-2, 7)}};
  integerize(tc);
  CHECK(tc.scale == std::vector<long long>{30, 4, 7});
  CHECK(tc.kmat[0] == std::vector<long long>{15, 10, 6});
  CHECK(tc.kmat[1] == std::vector<long long>{1, 6});
  CHECK(tc.kmat[2] == std::vector<long long>{-2});
}

TEST_CASE("rationalize recovers simple fractions from assembled forms") {
  SimplicialComplex m = flat_torus(8);
  CohomologyBasis basis = h1_basis(m);
  RealCochain pot = vertex_cochain(
      m, [](const std::vector<double>& p) { return 0.01 * std::sin(6.28 * p[0]); });
  std::vector<Decomposition> decomps;
  decomps.push_back(decompose(m, basis, assemble(m, basis, {0.25, 0.5}, pot)));
  decomps.push_back(decompose(m, basis, assemble(m, basis, {-0.75, 1.0}, pot)));
  TischlerCoefficients tc = rationalize(m, basis, decomps, 1e-4);
  CHECK(tc.halvings == 0);
  CHECK(tc.q[0][0] == ratq(1, 4));
  CHECK(tc.q[0][1] == ratq(1, 2));
  CHECK(tc.q[1][0] == ratq(-3, 4));
  CHECK(tc.q[1][1] == ratq(1, 1));
  CHECK(tc.eps_used <= tc.eps_threshold);
  CHECK(tc.perturbed.pass);
  integerize(tc);
  CHECK(tc.scale == std::vector<long long>{4, 4});
  CHECK(tc.kmat[0] == std::vector<long long>{1, 2});
  CHECK(tc.kmat[1] == std::vector<long long>{-3, 4});
}

TEST_CASE("tolerance halves until the perturbed forms separate") {
  SimplicialComplex m = flat_torus(8);
  CohomologyBasis basis = h1_basis(m);
  RealCochain zero = zero_potential(m);
  std::vector<Decomposition> decomps;
  decomps.push_back(decompose(m, basis, assemble(m, basis, {1.0, 0.51}, zero)));
  decomps.push_back(decompose(m, basis, assemble(m, basis, {1.0, 0.49}, zero)));
  // at eps 0.02 and 0.01 both second coefficients collapse onto 1/2, which
  // makes the perturbed forms coincide; the loop has to halve twice
  TischlerCoefficients tc = rationalize(m, basis, decomps, 0.02);
  CHECK(tc.halvings == 2);
  CHECK(tc.eps_threshold == doctest::Approx(0.005));
  CHECK(tc.q[0][1] != tc.q[1][1]);
  CHECK(tc.q[0][1] == ratq(25, 49));
  CHECK(tc.q[1][1] == ratq(24, 49));
  CHECK(tc.perturbed.pass);
}

TEST_CASE("fibration map stores exact winding periods") {
  SimplicialComplex m = flat_torus(8);
  CohomologyBasis basis = h1_basis(m);
  std::vector<std::vector<long long>> kmat = {{2, 0}, {0, 1}};
  std::vector<RealCochain> pots = {zero_potential(m), zero_potential(m)};
  FibrationMap fib = build_fibration_map(m, basis, kmat, {}, pots);
  REQUIRE(fib.k == 2);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      Rat p = period_over(fib.combo[i], basis.cycles.cycles[basis.selected[j]]);
      CHECK(p == Rat(static_cast<long>(kmat[i][j])));
    }
    for (int v = 0; v < m.num_vertices(); ++v) {
      double th = fib.theta(v, i);
      CHECK(th >= 0.0);
      CHECK(th < 1.0);
    }
  }
  // edge increments reproduce lift differences up to the integer winding
  RealCochain inc = fib.increment(m, 0);
  const auto& edges = m.edges();
  for (size_t e = 0; e < edges.size(); ++e) {
    double lhs = inc.values[e];
    double rhs = fib.lift(edges[e][1], 0) - fib.lift(edges[e][0], 0);
    CHECK(lhs - rhs == doctest::Approx(std::round(lhs - rhs)));
  }
}

TEST_CASE("doubled winding certifies as a two sheeted covering") {
  SimplicialComplex m = flat_torus(8);
  CohomologyBasis basis = h1_basis(m);
  std::vector<RealCochain> pots = {zero_potential(m), zero_potential(m)};
  FibrationMap fib = build_fibration_map(m, basis, {{2, 0}, {0, 1}}, {}, pots);
  FibrationCertificate cert = verify_fibration(m, fib);
  CHECK(cert.pass);
  CHECK(cert.rank.pass);
  CHECK(cert.coverage == doctest::Approx(1.0));
  CHECK(cert.fiber_constant);
  CHECK(cert.degree == 2);
  CHECK(cert.regular_values >= 50);
  CoveringReport rep = covering_report(m, cert);
  CHECK(rep.consistent);
  CHECK(rep.degree == 2);
  CHECK(rep.statement == "Theta is a 2-sheeted covering; M is diffeomorphic to T^2");
}

TEST_CASE("single winding row certifies as a circle fibration") {
  SimplicialComplex m = flat_torus(8);
  CohomologyBasis basis = h1_basis(m);
  FibrationMap fib = build_fibration_map(m, basis, {{1, 0}}, {}, {zero_potential(m)});
  FibrationCertificate cert = verify_fibration(m, fib);
  CHECK(cert.pass);
  CHECK(cert.verdict == "fibration over S^1");
  CHECK(cert.fiber_constant);
  CHECK(cert.regular_values > 0);
  // a circle-valued map cannot produce a full-dimension covering statement
  CHECK_THROWS_AS(covering_report(m, cert), InputError);
}

TEST_CASE("pipeline maps the coordinate forms to a diffeomorphism") {
  SimplicialComplex m = flat_torus(8);
  std::vector<RealCochain> forms = {coordinate_cochain(m, 0), coordinate_cochain(m, 1)};
  TischlerResult r = tischler_pipeline(m, forms);
  REQUIRE(r.exit_code == 0);
  CHECK(r.failure_stage.empty());
  CHECK(r.betti == 2);
  for (const auto& row : r.coeffs.q)
    for (const Rat& v : row) CHECK(v.get_den() == 1);
  CHECK(r.coeffs.halvings == 0);
  CHECK(r.cert.coverage == doctest::Approx(1.0));
  REQUIRE(r.has_covering);
  CHECK(r.covering.degree == 1);
  CHECK(r.covering.statement == "Theta is a diffeomorphism; M is diffeomorphic to T^2");
}

TEST_CASE("pipeline handles a single form as a circle fibration") {
  SimplicialComplex m = flat_torus(8);
  TischlerResult r = tischler_pipeline(m, {coordinate_cochain(m, 0)});
  REQUIRE(r.exit_code == 0);
  CHECK(r.cert.verdict == "fibration over S^1");
  CHECK_FALSE(r.has_covering);
}

TEST_CASE("pipeline rejects more classes than the Betti number") {
  SimplicialComplex m = klein_bottle(8);
  RealCochain dy = coordinate_cochain(m, 1);
  RealCochain tent = coboundary(
      m, vertex_cochain(m, [](const std::vector<double>& p) {
        return std::min(p[0], 1.0 - p[0]);
      }));
  TischlerResult r = tischler_pipeline(m, {dy, tent});
  CHECK(r.exit_code == 1);
  CHECK(r.failure_stage == "h1_basis");
  CHECK(r.failure_message ==
        "requested k=2 independent classes but first Betti number is 1");
}

TEST_CASE("pipeline flags a non-closed input form") {
  SimplicialComplex m = flat_torus(8);
  RealCochain bad;
  bad.degree = 1;
  bad.values.assign(m.edges().size(), 0.0);
  bad.values[0] = 1.0;
  TischlerResult r = tischler_pipeline(m, {bad});
  CHECK(r.exit_code == 1);
  CHECK(r.failure_stage == "closedness");
  CHECK_FALSE(r.closedness[0].closed);
}

TEST_CASE("pipeline flags pointwise dependent forms") {
  SimplicialComplex m = flat_torus(8);
  RealCochain dx = coordinate_cochain(m, 0);
  TischlerResult r = tischler_pipeline(m, {dx, dx});
  CHECK(r.exit_code == 1);
  CHECK(r.failure_stage == "independence");
}

TEST_CASE("pipeline flags cohomologous forms as a numerical failure") {
  SimplicialComplex m = flat_torus(8);
  RealCochain dx = coordinate_cochain(m, 0);
  RealCochain wiggle = coboundary(
      m, vertex_cochain(m, [](const std::vector<double>& p) {
        return 0.1 * std::sin(2.0 * M_PI * p[1]);
      }));
  RealCochain shifted;
  shifted.degree = 1;
  shifted.values.resize(dx.values.size());
  for (size_t e = 0; e < dx.values.size(); ++e)
    shifted.values[e] = dx.values[e] + wiggle.values[e];
  TischlerResult r = tischler_pipeline(m, {dx, shifted});
  CHECK(r.exit_code == 3);
  CHECK(r.failure_stage == "decompose");
  CHECK(r.failure_message == "distinct-class invariant violated (mesh too coarse)");
}

TEST_CASE("map construction validates its inputs") {
  SimplicialComplex m = flat_torus(8);
  CohomologyBasis basis = h1_basis(m);
  std::vector<RealCochain> one_pot = {zero_potential(m)};
  CHECK_THROWS_AS(build_fibration_map(m, basis, {}, {}, {}), InputError);
  CHECK_THROWS_AS(build_fibration_map(m, basis, {{1, 0, 0}}, {}, one_pot), InputError);
  CHECK_THROWS_AS(build_fibration_map(m, basis, {{1, 0}}, {{2}, {3}}, one_pot),
                  InputError);
  CHECK_THROWS_AS(build_fibration_map(m, basis, {{1, 0}}, {{0}}, one_pot), InputError);
  RealCochain short_pot;
  short_pot.degree = 0;
  short_pot.values.assign(3, 0.0);
  CHECK_THROWS_AS(build_fibration_map(m, basis, {{1, 0}}, {}, {short_pot}), InputError);
}
