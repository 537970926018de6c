#pragma once

#include <gmpxx.h>

#include <vector>

#include "toruscope/errors.hpp"

namespace toruscope {

using Rat = mpq_class;
using Int = mpz_class;

using MatQ = std::vector<std::vector<Rat>>;
using MatZ = std::vector<std::vector<Int>>;
using VecQ = std::vector<Rat>;
using VecZ = std::vector<Int>;

/// Rational from numerator/denominator, reduced to lowest terms.
Rat ratq(long num, long den);

/// Rank over Q via Gaussian elimination (exact).
int rank_rational(MatQ a);

/// Solve A*X = B for square nonsingular A, B given as columns.
/// Throws NumericError if A is singular.
MatQ solve_rational(MatQ a, MatQ b_cols);

/// Determinant of a square integer matrix (fraction-free elimination).
Int det_integer(MatZ a);

/// Basis (as rows) of the integer kernel {x in Z^c : A x = 0} of an
/// r x c integer matrix.  The result spans a saturated lattice: any
/// rational kernel vector with integer entries is an integer combination
/// of the rows.
MatZ integer_kernel(const MatZ& a);

/// First continued-fraction convergent of x whose distance to x is at
/// most eps.  Exact: terminates with x itself when no earlier convergent
/// qualifies.
Rat continued_fraction_approx(const Rat& x, const Rat& eps);

}  // namespace toruscope
