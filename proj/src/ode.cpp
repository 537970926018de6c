#include "toruscope/ode.hpp"

#include "toruscope/errors.hpp"

#include <cmath>

namespace toruscope {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                 e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

}  // namespace

Eigen::VectorXd integrate(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& y0, double t_end, const OdeOptions& opts) {
  if (t_end == 0.0) return y0;
  const double dir = t_end > 0 ? 1.0 : -1.0;
  const int n = static_cast<int>(y0.size());
  Eigen::VectorXd y = y0, ynew(n), yerr(n);
  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n);
  double t = 0.0;
  double h = dir * std::min(opts.initial_step, std::abs(t_end));
  const double hmin = 1e-14 * std::max(1.0, std::abs(t_end));

  for (long long steps = 0; steps < opts.max_steps; ++steps) {
    double remaining = t_end - t;
    if (dir * remaining <= 0 || std::abs(remaining) < hmin) return y;
    if (dir * (t + h) > dir * t_end) h = remaining;
    if (std::abs(h) < hmin)
      throw NumericError("step size underflow during integration (t = " + std::to_string(t) +
                         ")");

    f(y, k1);
    tmp = y + h * (a21 * k1);
    f(tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    f(tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(tmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    f(ynew, k7);
    yerr = ynew - (y + h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7));

    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      double sc = opts.tol + opts.tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      double q = yerr[i] / sc;
      err += q * q;
    }
    err = std::sqrt(err / n);
    if (!std::isfinite(err))
      throw NumericError("integration produced a non-finite state");

    if (err <= 1.0) {
      t += h;
      y.swap(ynew);
      if (opts.box) {
        for (int i = 0; i < n; ++i)
          if (y[i] < (*opts.box)[i][0] - opts.box_slack ||
              y[i] > (*opts.box)[i][1] + opts.box_slack)
            throw NumericError("trajectory left the system box during integration");
      }
      if (opts.monitor) opts.monitor(t, y);
    }
    double fac = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    h *= std::min(5.0, std::max(0.2, fac));
  }
  throw NumericError("integration exceeded the step budget");
}

}  // namespace toruscope
