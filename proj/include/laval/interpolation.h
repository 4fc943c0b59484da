#pragma once

#include <vector>

#include "laval/grid.h"

namespace laval {

// Index k with x[k] <= xi < x[k+1], clamped to [0, n-2]. x must increase.
int locate(const std::vector<double>& x, double xi);

double linear_interp(const std::vector<double>& x, const std::vector<double>& y, double xi);

// Lagrange polynomial through (x[k], y[k]), k < n, evaluated at xi.
double lagrange(const double* x, const double* y, int n, double xi);
// Derivative of the same polynomial at xi.
double lagrange_derivative(const double* x, const double* y, int n, double xi);

// Local 4-point Lagrange interpolation on increasing nodes (fewer if the
// line is shorter); the stencil is centred on the bracketing interval.
double lagrange_interp(const std::vector<double>& x, const std::vector<double>& y, double xi);
double lagrange_slope(const std::vector<double>& x, const std::vector<double>& y, double xi);

// Running integral of the samples y over x, starting with 0 at x[first]:
// entry i holds the integral from x[first] to x[i] (negative for i < first).
// Each cell uses the cubic through four neighbouring nodes, all drawn from
// [lo, x.size()) so a coarse leading cell can be kept out of the stencils.
std::vector<double> cumulative_cubic(const std::vector<double>& x, const std::vector<double>& y,
                                     int first = 0, int lo = 0);

// Shape-preserving piecewise cubic (Fritsch-Carlson slopes). Outside the data
// range it continues linearly with the end slopes.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y);
  double operator()(double xi) const;
  double derivative(double xi) const;
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& y() const { return y_; }

 private:
  std::vector<double> x_, y_, d_;
};

// Tensor-product 4-point Lagrange interpolation of a node field on a
// rectilinear grid with arbitrary spacing.
class GridInterpolator {
 public:
  GridInterpolator(const std::vector<double>& x0, const std::vector<double>& x1,
                   const Field2D& f);
  double operator()(double a, double b) const;

 private:
  const std::vector<double>& x0_;
  const std::vector<double>& x1_;
  const Field2D& f_;
};

}  // namespace laval
