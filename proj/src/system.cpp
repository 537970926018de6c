#include "toruscope/system.hpp"

#include "toruscope/errors.hpp"
#include "toruscope/rng.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace toruscope {

namespace {

constexpr double kResidualTol = 1e-8;
constexpr double kRankTol = 1e-8;
constexpr double kRegularFraction = 0.95;

Expression parse_field(const json& j, const std::string& what, int dim) {
  if (!j.is_string()) throw InputError(what + " must be a string expression");
  Expression e;
  try {
    e = Expression::parse(j.get<std::string>());
  } catch (const InputError& err) {
    throw InputError(what + ": " + err.what());
  }
  if (e.max_variable() > dim)
    throw InputError(what + " uses x" + std::to_string(e.max_variable()) +
                     " but the dimension is " + std::to_string(dim));
  return e;
}

/// Gradient of the (a, b) bivector entry, honoring antisymmetry.
void entry_gradient(const std::vector<Eigen::VectorXd>& upper_grads, int dim, int a, int b,
                    Eigen::VectorXd& out) {
  if (a == b) {
    out.setZero();
    return;
  }
  bool flip = a > b;
  if (flip) std::swap(a, b);
  // Row-major index into the upper triangle list.
  int idx = a * dim - a * (a + 1) / 2 + (b - a - 1);
  out = flip ? Eigen::VectorXd(-upper_grads[idx]) : upper_grads[idx];
}

int svd_rank(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  int r = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > tol) ++r;
  return r;
}

}  // namespace

bool SystemDefinition::inside_box(const Eigen::VectorXd& x, double slack) const {
  for (int i = 0; i < dim; ++i)
    if (x[i] < box[i][0] - slack || x[i] > box[i][1] + slack) return false;
  return true;
}

SystemDefinition system_from_json(const json& doc) {
  SystemDefinition sys;
  if (!doc.is_object()) throw InputError("system document must be a JSON object");
  if (!doc.contains("dimension") || !doc["dimension"].is_number_integer())
    throw InputError("system document needs an integer \"dimension\"");
  sys.dim = doc["dimension"].get<int>();
  if (sys.dim < 1) throw InputError("dimension must be positive");

  if (!doc.contains("structure") || !doc["structure"].is_object())
    throw InputError("system document needs a \"structure\" object");
  const json& st = doc["structure"];
  std::string kind = st.value("kind", "");
  if (kind == "canonical") {
    sys.canonical = true;
    if (sys.dim % 2 != 0)
      throw InputError("canonical structure requires an even dimension");
    if (st.contains("bivector"))
      throw InputError("canonical structure does not take a bivector");
  } else if (kind == "poisson") {
    sys.canonical = false;
    if (!st.contains("bivector") || !st["bivector"].is_array())
      throw InputError("poisson structure needs a \"bivector\" array");
    const json& bv = st["bivector"];
    if (static_cast<int>(bv.size()) != sys.dim - 1)
      throw InputError("bivector must have dimension-1 rows of upper-triangle entries");
    for (int i = 0; i < sys.dim - 1; ++i) {
      if (!bv[i].is_array() || static_cast<int>(bv[i].size()) != sys.dim - 1 - i)
        throw InputError("bivector row " + std::to_string(i) + " must have " +
                         std::to_string(sys.dim - 1 - i) + " entries");
      std::vector<Expression> row;
      for (int j = 0; j < sys.dim - 1 - i; ++j)
        row.push_back(parse_field(bv[i][j], "bivector entry (" + std::to_string(i + 1) + "," +
                                                std::to_string(i + 2 + j) + ")",
                                  sys.dim));
      sys.bivector.push_back(std::move(row));
    }
  } else {
    throw InputError("structure kind must be \"canonical\" or \"poisson\"");
  }

  if (!doc.contains("integrals") || !doc["integrals"].is_array() || doc["integrals"].empty())
    throw InputError("system document needs a nonempty \"integrals\" array");
  for (size_t i = 0; i < doc["integrals"].size(); ++i)
    sys.integrals.push_back(
        parse_field(doc["integrals"][i], "integral " + std::to_string(i + 1), sys.dim));

  int s = sys.num_integrals();
  sys.rank = doc.value("rank", s);
  if (sys.rank < 1 || sys.rank > s)
    throw InputError("rank must lie between 1 and the number of integrals");

  if (!doc.contains("box") || !doc["box"].is_array() ||
      static_cast<int>(doc["box"].size()) != sys.dim)
    throw InputError("system document needs a \"box\" with one [lo,hi] pair per coordinate");
  for (int i = 0; i < sys.dim; ++i) {
    const json& pr = doc["box"][i];
    if (!pr.is_array() || pr.size() != 2 || !pr[0].is_number() || !pr[1].is_number())
      throw InputError("box entry " + std::to_string(i) + " must be a [lo,hi] pair");
    double lo = pr[0].get<double>(), hi = pr[1].get<double>();
    if (!(lo < hi)) throw InputError("box entry " + std::to_string(i) + " must have lo < hi");
    sys.box.push_back({lo, hi});
  }
  return sys;
}

Eigen::MatrixXd bivector_at(const SystemDefinition& sys, const Eigen::VectorXd& x) {
  int n = sys.dim;
  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(n, n);
  if (sys.canonical) {
    int h = n / 2;
    for (int i = 0; i < h; ++i) {
      pi(i, h + i) = 1.0;
      pi(h + i, i) = -1.0;
    }
    return pi;
  }
  for (int i = 0; i < n - 1; ++i)
    for (int j = i + 1; j < n; ++j) {
      double v = sys.bivector[i][j - i - 1].value(x);
      pi(i, j) = v;
      pi(j, i) = -v;
    }
  return pi;
}

double poisson_bracket(const SystemDefinition& sys, const Expression& f, const Expression& g,
                       const Eigen::VectorXd& x) {
  Eigen::VectorXd df, dg;
  f.value_and_gradient(x, df);
  g.value_and_gradient(x, dg);
  return df.dot(bivector_at(sys, x) * dg);
}

Eigen::VectorXd hamiltonian_field(const SystemDefinition& sys, const Expression& f,
                                  const Eigen::VectorXd& x) {
  Eigen::VectorXd df;
  f.value_and_gradient(x, df);
  return bivector_at(sys, x) * df;
}

Eigen::MatrixXd integral_jacobian(const SystemDefinition& sys, const Eigen::VectorXd& x) {
  Eigen::MatrixXd jac(sys.num_integrals(), sys.dim);
  Eigen::VectorXd g;
  for (int i = 0; i < sys.num_integrals(); ++i) {
    sys.integrals[i].value_and_gradient(x, g);
    jac.row(i) = g.transpose();
  }
  return jac;
}

Eigen::VectorXd integral_values(const SystemDefinition& sys, const Eigen::VectorXd& x) {
  Eigen::VectorXd v(sys.num_integrals());
  for (int i = 0; i < sys.num_integrals(); ++i) v[i] = sys.integrals[i].value(x);
  return v;
}

double jacobi_residual(const SystemDefinition& sys, const std::vector<Eigen::VectorXd>& points) {
  if (sys.canonical) return 0.0;  // constant coefficients, cyclic sum vanishes identically
  int n = sys.dim;
  double worst = 0.0;
  std::vector<Eigen::VectorXd> upper_grads;
  Eigen::VectorXd gjk(n), gki(n), gij(n);
  for (const Eigen::VectorXd& x : points) {
    Eigen::MatrixXd pi = bivector_at(sys, x);
    upper_grads.clear();
    Eigen::VectorXd g;
    for (int i = 0; i < n - 1; ++i)
      for (int j = i + 1; j < n; ++j) {
        sys.bivector[i][j - i - 1].value_and_gradient(x, g);
        upper_grads.push_back(g);
      }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
          entry_gradient(upper_grads, n, j, k, gjk);
          entry_gradient(upper_grads, n, k, i, gki);
          entry_gradient(upper_grads, n, i, j, gij);
          double sum = 0.0;
          for (int l = 0; l < n; ++l)
            sum += pi(l, i) * gjk[l] + pi(l, j) * gki[l] + pi(l, k) * gij[l];
          worst = std::max(worst, std::abs(sum));
        }
  }
  return worst;
}

double involution_residual(const SystemDefinition& sys,
                           const std::vector<Eigen::VectorXd>& points) {
  int s = sys.num_integrals();
  double worst = 0.0;
  for (const Eigen::VectorXd& x : points)
    for (int i = 0; i < sys.rank; ++i)
      for (int j = i + 1; j < s; ++j)
        worst = std::max(worst,
                         std::abs(poisson_bracket(sys, sys.integrals[i], sys.integrals[j], x)));
  return worst;
}

std::vector<Eigen::VectorXd> sample_box(const SystemDefinition& sys, int count,
                                        unsigned long long seed) {
  std::mt19937_64 gen(seed);
  std::vector<Eigen::VectorXd> pts(count, Eigen::VectorXd(sys.dim));
  for (int k = 0; k < count; ++k)
    for (int i = 0; i < sys.dim; ++i)
      pts[k][i] = uniform_in(gen, sys.box[i][0], sys.box[i][1]);
  return pts;
}

ClassificationVerdict classify_system(const SystemDefinition& sys, int samples,
                                      unsigned long long seed) {
  ClassificationVerdict cv;
  cv.dim = sys.dim;
  cv.s = sys.num_integrals();
  cv.r = sys.rank;
  std::vector<Eigen::VectorXd> pts = sample_box(sys, samples, seed);

  cv.jacobi_max = jacobi_residual(sys, pts);
  if (cv.jacobi_max > kResidualTol) {
    cv.verdict = "not integrable (Jacobi identity fails)";
    return cv;
  }
  cv.involution_max = involution_residual(sys, pts);
  if (cv.involution_max > kResidualTol) {
    cv.verdict = "not integrable (integrals not in involution)";
    return cv;
  }
  if (cv.r + cv.s != cv.dim) {
    cv.verdict = "not integrable (rank and integral count do not fill the dimension)";
    return cv;
  }

  int regular = 0;
  int generic_rank = 0;
  Eigen::MatrixXd fields(sys.dim, sys.rank);
  for (const Eigen::VectorXd& x : pts) {
    Eigen::MatrixXd jac = integral_jacobian(sys, x);
    Eigen::MatrixXd pi = bivector_at(sys, x);
    for (int i = 0; i < sys.rank; ++i) {
      Eigen::VectorXd g;
      sys.integrals[i].value_and_gradient(x, g);
      fields.col(i) = pi * g;
    }
    if (svd_rank(jac, kRankTol) == cv.s && svd_rank(fields, kRankTol) == cv.r) ++regular;
    generic_rank = std::max(generic_rank, svd_rank(pi, kRankTol));
  }
  cv.regular_fraction = samples > 0 ? static_cast<double>(regular) / samples : 0.0;
  cv.generic_rank = generic_rank;
  if (cv.regular_fraction < kRegularFraction) {
    cv.verdict = "not integrable (regular points are too sparse in the box)";
    return cv;
  }
  if (generic_rank > 2 * cv.r) {
    cv.verdict = "not integrable (structure rank exceeds twice the involutive rank)";
    return cv;
  }
  cv.integrable = true;
  if (cv.r == cv.s)
    cv.verdict = "commutative Liouville";
  else
    cv.verdict = "non-commutative rank " + std::to_string(cv.r);
  return cv;
}

}  // namespace toruscope
