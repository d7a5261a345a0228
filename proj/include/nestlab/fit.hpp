#pragma once

#include <vector>

namespace nestlab {

/// Least-squares slope of log(quantity) against log(scale).
struct ExponentFit {
  std::vector<double> log_scale;
  std::vector<double> log_quantity;
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  int excluded = 0;  ///< samples dropped for a nonpositive quantity or scale
  bool pass = false;
};

/// Throws FitError when fewer than 3 positive samples remain.
ExponentFit fit_exponent(const std::vector<double>& scales, const std::vector<double>& quantities, double target,
                         double tolerance);

}  // namespace nestlab
