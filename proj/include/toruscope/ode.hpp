#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <vector>

namespace toruscope {

struct OdeOptions {
  double tol = 1e-10;        // both absolute and relative
  double initial_step = 1e-2;
  long long max_steps = 2000000;
  /// When set, accepted states must stay inside (with slack) or the
  /// integration aborts with NumericError.
  const std::vector<std::array<double, 2>>* box = nullptr;
  double box_slack = 1.0;
  /// Called after every accepted step with (t, y).
  std::function<void(double, const Eigen::VectorXd&)> monitor;
};

/// Dormand-Prince 5(4) with adaptive steps.  Integrates y' = f(y) from y0 at
/// t = 0 to t = t_end (either sign); t_end == 0 returns y0 unchanged.
Eigen::VectorXd integrate(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& y0, double t_end, const OdeOptions& opts = {});

}  // namespace toruscope
