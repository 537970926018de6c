#include "toruscope/exact.hpp"

#include <algorithm>
#include <cstdlib>

namespace toruscope {

Rat ratq(long num, long den) {
  if (den == 0) throw NumericError("rational with zero denominator");
  Rat r(num, den);
  r.canonicalize();
  return r;
}

int rank_rational(MatQ a) {
  if (a.empty()) return 0;
  const int rows = static_cast<int>(a.size());
  const int cols = static_cast<int>(a[0].size());
  int rank = 0;
  for (int c = 0; c < cols && rank < rows; ++c) {
    int pivot = -1;
    for (int r = rank; r < rows; ++r) {
      if (a[r][c] != 0) {
        pivot = r;
        break;
      }
    }
    if (pivot < 0) continue;
    std::swap(a[rank], a[pivot]);
    for (int r = rank + 1; r < rows; ++r) {
      if (a[r][c] == 0) continue;
      Rat f = a[r][c] / a[rank][c];
      for (int j = c; j < cols; ++j) a[r][j] -= f * a[rank][j];
    }
    ++rank;
  }
  return rank;
}

MatQ solve_rational(MatQ a, MatQ b) {
  const int n = static_cast<int>(a.size());
  if (n == 0) return {};
  const int k = static_cast<int>(b[0].size());
  for (int c = 0; c < n; ++c) {
    int pivot = -1;
    for (int r = c; r < n; ++r) {
      if (a[r][c] != 0) {
        pivot = r;
        break;
      }
    }
    if (pivot < 0) throw NumericError("singular matrix in exact solve");
    std::swap(a[c], a[pivot]);
    std::swap(b[c], b[pivot]);
    for (int r = c + 1; r < n; ++r) {
      if (a[r][c] == 0) continue;
      Rat f = a[r][c] / a[c][c];
      for (int j = c; j < n; ++j) a[r][j] -= f * a[c][j];
      for (int j = 0; j < k; ++j) b[r][j] -= f * b[c][j];
    }
  }
  MatQ x(n, VecQ(k, Rat(0)));
  for (int r = n - 1; r >= 0; --r) {
    for (int j = 0; j < k; ++j) {
      Rat s = b[r][j];
      for (int c = r + 1; c < n; ++c) s -= a[r][c] * x[c][j];
      x[r][j] = s / a[r][r];
    }
  }
  return x;
}

Int det_integer(MatZ a) {
  const int n = static_cast<int>(a.size());
  if (n == 0) return Int(1);
  Int prev(1);
  int sign = 1;
  for (int c = 0; c < n - 1; ++c) {
    int pivot = -1;
    for (int r = c; r < n; ++r) {
      if (a[r][c] != 0) {
        pivot = r;
        break;
      }
    }
    if (pivot < 0) return Int(0);
    if (pivot != c) {
      std::swap(a[c], a[pivot]);
      sign = -sign;
    }
    for (int r = c + 1; r < n; ++r) {
      for (int j = c + 1; j < n; ++j) {
        Int num = a[r][j] * a[c][c] - a[r][c] * a[c][j];
        mpz_divexact(a[r][j].get_mpz_t(), num.get_mpz_t(), prev.get_mpz_t());
      }
      a[r][c] = 0;
    }
    prev = a[c][c];
  }
  return sign > 0 ? a[n - 1][n - 1] : Int(-a[n - 1][n - 1]);
}

MatZ integer_kernel(const MatZ& a_in) {
  const int rows = static_cast<int>(a_in.size());
  const int cols = rows > 0 ? static_cast<int>(a_in[0].size()) : 0;
  if (cols == 0) return {};

  MatZ a = a_in;
  // u tracks the unimodular column transform applied to a.
  MatZ u(cols, VecZ(cols, Int(0)));
  for (int i = 0; i < cols; ++i) u[i][i] = 1;

  std::vector<bool> active(cols, true);
  auto col_axpy = [&](int dst, int src, const Int& q) {
    // column dst -= q * column src, in both a and u
    for (int r = 0; r < rows; ++r) a[r][dst] -= q * a[r][src];
    for (int r = 0; r < cols; ++r) u[r][dst] -= q * u[r][src];
  };

  for (int row = 0; row < rows; ++row) {
    for (;;) {
      int best = -1;
      int live = 0;
      for (int c = 0; c < cols; ++c) {
        if (!active[c] || a[row][c] == 0) continue;
        ++live;
        if (best < 0 || cmp(abs(a[row][c]), abs(a[row][best])) < 0) best = c;
      }
      if (live <= 1) {
        if (live == 1) active[best] = false;  // pivot column consumed
        break;
      }
      for (int c = 0; c < cols; ++c) {
        if (!active[c] || c == best || a[row][c] == 0) continue;
        // truncated division leaves |remainder| < |pivot|
        Int q = a[row][c] / a[row][best];
        if (q != 0) col_axpy(c, best, q);
      }
    }
  }

  MatZ kernel;
  for (int c = 0; c < cols; ++c) {
    if (!active[c]) continue;
    VecZ v(cols);
    for (int r = 0; r < cols; ++r) v[r] = u[r][c];
    kernel.push_back(std::move(v));
  }
  return kernel;
}

Rat continued_fraction_approx(const Rat& x, const Rat& eps) {
  if (sgn(eps) < 0) throw NumericError("negative tolerance in rational approximation");
  Rat t = abs(x);
  Int n = t.get_num();
  Int d = t.get_den();
  Int h0(0), h1(1), k0(1), k1(0);
  Rat best;
  for (;;) {
    Int q, r;
    mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
    Int h = q * h1 + h0;
    Int k = q * k1 + k0;
    best = Rat(h);
    best /= Rat(k);
    best.canonicalize();
    if (abs(t - best) <= eps || r == 0) break;
    h0 = h1;
    h1 = h;
    k0 = k1;
    k1 = k;
    n = d;
    d = r;
  }
  if (sgn(x) < 0) best = -best;
  return best;
}

}  // namespace toruscope
