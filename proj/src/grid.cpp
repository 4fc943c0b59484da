#include "laval/grid.h"

#include <cmath>
#include <stdexcept>

namespace laval {

std::vector<double> uniform_nodes(double a, double b, int n) {
  if (n < 1) throw std::invalid_argument("uniform_nodes: need at least one cell");
  std::vector<double> x(n + 1);
  for (int i = 0; i <= n; ++i) x[i] = a + (b - a) * static_cast<double>(i) / n;
  x[n] = b;
  return x;
}

std::vector<double> graded_nodes(double a, double b, int n, double ratio,
                                 double max_stretch, ClusterEnd end) {
  if (n < 1) throw std::invalid_argument("graded_nodes: need at least one cell");
  if (!(ratio >= 1.0) || !(max_stretch >= 1.0)) {
    throw std::invalid_argument("graded_nodes: ratio and stretch must be >= 1");
  }
  double r = ratio;
  if (n > 1) r = std::min(ratio, std::pow(max_stretch, 1.0 / (n - 1)));
  std::vector<double> w(n);
  double acc = 1.0;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    w[i] = acc;
    total += acc;
    acc *= r;
  }
  std::vector<double> x(n + 1);
  if (end == ClusterEnd::lower) {
    x[0] = a;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      s += w[i];
      x[i + 1] = a + (b - a) * s / total;
    }
  } else {
    x[n] = b;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      s += w[i];
      x[n - 1 - i] = b - (b - a) * s / total;
    }
  }
  x[0] = a;
  x[n] = b;
  return x;
}

}  // namespace laval
