#pragma once

#include <vector>

namespace laval {

struct PowerFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

// Least-squares fit of log|y| = log C + k log|x| over samples with
// lo <= |x| <= hi. Samples with y == 0 are rejected with an exception.
PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y,
                       double lo, double hi);

// Observed order between successive differences of a refinement sequence.
std::vector<double> observed_orders(const std::vector<double>& differences,
                                    double refinement_ratio = 2.0);

}  // namespace laval
