#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "toruscope/errors.hpp"
#include "toruscope/expression.hpp"
#include "toruscope/rng.hpp"

#include <cmath>
#include <random>

using namespace toruscope;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd x(2);
  x << a, b;
  return x;
}

// Central-difference oracle for the forward-mode gradient.
Eigen::VectorXd fd_gradient(const Expression& e, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (e.value(xp) - e.value(xm)) / (2 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("values follow the usual precedence rules") {
  CHECK(Expression::parse("2+3*4^2").value({}) == 50.0);
  CHECK(Expression::parse("(2+3)*4").value({}) == 20.0);
  CHECK(Expression::parse("2-3-4").value({}) == -5.0);
  CHECK(Expression::parse("16/4/2").value({}) == 2.0);
  CHECK(Expression::parse("x1^-2").value(vec2(2, 0)) == 0.25);
  CHECK(Expression::parse("-x1^2").value(vec2(3, 0)) == 9.0);  // (-x1)^2
  CHECK(Expression::parse("2*-3").value({}) == -6.0);
  CHECK(Expression::parse("x1^0").value(vec2(0, 0)) == 1.0);
  CHECK(Expression::parse(" 1.5 + .5 ").value({}) == 2.0);
  CHECK(Expression::parse("sin(0)").value({}) == 0.0);
  CHECK(Expression::parse("exp(0)+cos(0)").value({}) == 2.0);
  CHECK(Expression::parse("sqrt(2)").value({}) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("exponents bind to the whole factor including a leading minus") {
  Expression e = Expression::parse("-x1^2");
  Expression f = Expression::parse("(-x1)^2");
  CHECK(e.same_tree(f));
  CHECK(e.value(vec2(3, 0)) == 9.0);
}

TEST_CASE("parse errors carry byte offsets") {
  CHECK_THROWS_WITH_AS(Expression::parse("x1 +"), "syntax error at offset 4", InputError);
  CHECK_THROWS_WITH_AS(Expression::parse("x1 x2"), "syntax error at offset 3", InputError);
  CHECK_THROWS_WITH_AS(Expression::parse("2e"), "syntax error at offset 1", InputError);
  CHECK_THROWS_WITH_AS(Expression::parse(""), "syntax error at offset 0", InputError);
  CHECK_THROWS_WITH_AS(Expression::parse("2*y"), "unknown identifier 'y' at offset 2",
                       InputError);
  CHECK_THROWS_WITH_AS(Expression::parse("x0"), "unknown identifier 'x0' at offset 0",
                       InputError);
  CHECK_THROWS_WITH_AS(Expression::parse("sin x1"),
                       "syntax error at offset 4 (expected '(' after function name)",
                       InputError);
  CHECK_THROWS_WITH_AS(Expression::parse("(x1"), "syntax error at offset 3 (expected ')')",
                       InputError);
  CHECK_THROWS_WITH_AS(Expression::parse("x1^1.5"), "non-integer exponent at offset 3",
                       InputError);
  CHECK_THROWS_WITH_AS(Expression::parse("x1^x2"),
                       "syntax error at offset 3 (exponent must be an integer literal)",
                       InputError);
  // one exponent per factor: a second '^' is trailing garbage
  CHECK_THROWS_WITH_AS(Expression::parse("2^3^2"), "syntax error at offset 3", InputError);
}

TEST_CASE("evaluation errors carry byte offsets") {
  CHECK_THROWS_WITH_AS(Expression::parse("1/x1").value(vec2(0, 0)),
                       "division by zero at offset 1", InputError);
  CHECK_THROWS_WITH_AS(Expression::parse("sqrt(x1)").value(vec2(-1, 0)),
                       "sqrt of a non-positive value at offset 0", InputError);
  CHECK_THROWS_WITH_AS(Expression::parse("sqrt(x1)").value(vec2(0, 0)),
                       "sqrt of a non-positive value at offset 0", InputError);
  CHECK_THROWS_WITH_AS(Expression::parse("x1^-1").value(vec2(0, 0)),
                       "zero raised to a negative power at offset 2", InputError);
  Eigen::VectorXd one(1);
  one << 1.0;
  CHECK_THROWS_WITH_AS(Expression::parse("x2").value(one),
                       "variable x2 exceeds the system dimension at offset 0", InputError);
}

TEST_CASE("max_variable reports the highest index used") {
  CHECK(Expression::parse("2.5").max_variable() == 0);
  CHECK(Expression::parse("x1").max_variable() == 1);
  CHECK(Expression::parse("x3+x1").max_variable() == 3);
  CHECK(Expression::parse("sin(x12)").max_variable() == 12);
}

TEST_CASE("printing uses minimal parentheses and round trips") {
  std::vector<std::string> sources = {
      "2+3*4^2",       "(2+3)*4",        "2*(3+4)",     "x1-(x2-x3)",
      "x1-x2-x3",      "-x1^2",          "(x1+1)^2",    "sqrt(x1^2+1)",
      "x1/(x2*x3)",    "x1/x2/x3",       "0.5*x1",      "-(x1+x2)",
      "sin(x1)*cos(x2)", "exp(-x1^2-x2^2)", "x1^-2",     "2*-3",
  };
  for (const std::string& s : sources) {
    Expression e = Expression::parse(s);
    std::string printed = e.str();
    Expression back = Expression::parse(printed);
    CHECK(back.same_tree(e));
    // printing is a fixed point
    CHECK(back.str() == printed);
  }
  CHECK(Expression::parse("2 + 3 * 4 ^ 2").str() == "2+3*4^2");
  CHECK(Expression::parse("x1-(x2-x3)").str() == "x1-(x2-x3)");
  CHECK(Expression::parse("2*(3+4)").str() == "2*(3+4)");
}

TEST_CASE("same_tree ignores whitespace but not structure") {
  CHECK(Expression::parse("x1+x2").same_tree(Expression::parse(" x1 + x2 ")));
  CHECK_FALSE(Expression::parse("x1+x2").same_tree(Expression::parse("x2+x1")));
  CHECK_FALSE(Expression::parse("x1+x2").same_tree(Expression::parse("x1-x2")));
  CHECK_FALSE(Expression::parse("2").same_tree(Expression::parse("2.5")));
}

TEST_CASE("forward gradients match simple hand results exactly") {
  Eigen::VectorXd g;
  double v = Expression::parse("x1^2*x2").value_and_gradient(vec2(2, 3), g);
  CHECK(v == 12.0);
  CHECK(g[0] == 12.0);
  CHECK(g[1] == 4.0);
  v = Expression::parse("x1/x2").value_and_gradient(vec2(1, 2), g);
  CHECK(v == 0.5);
  CHECK(g[0] == 0.5);
  CHECK(g[1] == -0.25);
}

TEST_CASE("forward gradients agree with central differences") {
  std::vector<std::string> catalog = {
      "sin(x1*x2)",
      "cos(x1)+exp(x2)",
      "sqrt(x1^2+x2^2+1)",
      "x1^3/(2+cos(x2))",
      "(x1+x2)^-2",
      "exp(-x1^2-x2^2)",
      "x1*x2/(1+x1^2)",
      "-x1^2+2*x1*x2-x2^2",
      "sqrt(exp(x1)+exp(x2))",
  };
  std::mt19937_64 gen(3);
  const double h = 1e-5;
  for (const std::string& s : catalog) {
    Expression e = Expression::parse(s);
    for (int trial = 0; trial < 25; ++trial) {
      Eigen::VectorXd x = vec2(0.3 + uniform01(gen), 0.3 + uniform01(gen));
      Eigen::VectorXd g;
      double v = e.value_and_gradient(x, g);
      CHECK(v == e.value(x));
      Eigen::VectorXd fd = fd_gradient(e, x, h);
      for (int i = 0; i < 2; ++i) {
        double denom = std::max(1.0, std::abs(g[i]));
        CHECK(std::abs(g[i] - fd[i]) / denom < 1e-6);
      }
    }
  }
}
