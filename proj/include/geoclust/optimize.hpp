#pragma once

#include <functional>

#include <Eigen/Core>

namespace geoclust {

struct NelderMeadOptions {
  int max_evaluations = 4000;
  double f_tolerance = 1e-14;  // relative spread of simplex values
  double x_tolerance = 1e-10;  // simplex diameter, in the caller's units
  int restarts = 3;            // re-inflate the simplex around the best point
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
};

/// Derivative-free minimisation with the standard reflection / expansion /
/// contraction / shrink coefficients (1, 2, 1/2, 1/2). `step` sets the initial
/// simplex edge per coordinate.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& start, const Eigen::VectorXd& step,
                             const NelderMeadOptions& options = {});

}  // namespace geoclust
