#include "nestlab/fit.hpp"

#include "nestlab/error.hpp"

#include <cmath>

namespace nestlab {

ExponentFit fit_exponent(const std::vector<double>& scales, const std::vector<double>& quantities, double target,
                         double tolerance) {
  if (scales.size() != quantities.size()) throw FitError("fit_exponent: size mismatch");
  ExponentFit fit;
  fit.target = target;
  fit.tolerance = tolerance;
  for (std::size_t k = 0; k < scales.size(); ++k) {
    if (!(scales[k] > 0.0) || !(quantities[k] > 0.0) || !std::isfinite(quantities[k])) {
      ++fit.excluded;
      continue;
    }
    fit.log_scale.push_back(std::log(scales[k]));
    fit.log_quantity.push_back(std::log(quantities[k]));
  }
  const std::size_t n = fit.log_scale.size();
  if (n < 3) throw FitError("fit_exponent: fewer than 3 positive samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += fit.log_scale[k];
    my += fit.log_quantity[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (fit.log_scale[k] - mx) * (fit.log_scale[k] - mx);
    sxy += (fit.log_scale[k] - mx) * (fit.log_quantity[k] - my);
  }
  if (!(sxx > 0.0)) throw FitError("fit_exponent: all scales coincide");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = fit.log_quantity[k] - fit.intercept - fit.slope * fit.log_scale[k];
    sse += r * r;
  }
  fit.stderr_slope = n > 2 ? std::sqrt(sse / (n - 2) / sxx) : 0.0;
  fit.pass = std::abs(fit.slope - target) <= tolerance;
  return fit;
}

}  // namespace nestlab
