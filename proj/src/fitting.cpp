#include "laval/fitting.h"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace laval {

PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y,
                       double lo, double hi) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_power_law: size mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int n = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double ax = std::abs(x[i]);
    if (ax < lo || ax > hi) continue;
    if (y[i] == 0.0 || !std::isfinite(y[i])) {
      throw std::domain_error("fit_power_law: zero or non-finite sample in window");
    }
    const double lx = std::log(ax), ly = std::log(std::abs(y[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
    ++n;
  }
  if (n < 3) throw std::domain_error("fit_power_law: fewer than 3 samples in window");
  const double den = n * sxx - sx * sx;
  if (!(std::abs(den) > 0.0)) throw std::domain_error("fit_power_law: degenerate window");
  PowerFit fit;
  fit.points = n;
  fit.exponent = (n * sxy - sx * sy) / den;
  const double intercept = (sy - fit.exponent * sx) / n;
  fit.prefactor = std::exp(intercept);
  const double ss_tot = syy - sy * sy / n;
  double ss_res = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double ax = std::abs(x[i]);
    if (ax < lo || ax > hi) continue;
    const double r = std::log(std::abs(y[i])) - intercept - fit.exponent * std::log(ax);
    ss_res += r * r;
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

std::vector<double> observed_orders(const std::vector<double>& d, double ratio) {
  std::vector<double> out;
  for (size_t i = 0; i + 1 < d.size(); ++i) {
    if (d[i + 1] <= 0.0 || d[i] <= 0.0) {
      out.push_back(std::numeric_limits<double>::infinity());
    } else {
      out.push_back(std::log(d[i] / d[i + 1]) / std::log(ratio));
    }
  }
  return out;
}

}  // namespace laval
