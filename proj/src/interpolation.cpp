#include "laval/interpolation.h"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace laval {

int locate(const std::vector<double>& x, double xi) {
  const int n = static_cast<int>(x.size());
  if (n < 2) throw std::invalid_argument("locate: need two nodes");
  auto it = std::upper_bound(x.begin(), x.end(), xi);
  int k = static_cast<int>(it - x.begin()) - 1;
  return std::clamp(k, 0, n - 2);
}

double linear_interp(const std::vector<double>& x, const std::vector<double>& y, double xi) {
  const int k = locate(x, xi);
  const double t = (xi - x[k]) / (x[k + 1] - x[k]);
  return y[k] + t * (y[k + 1] - y[k]);
}

double lagrange(const double* x, const double* y, int n, double xi) {
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double w = 1.0;
    for (int j = 0; j < n; ++j) {
      if (j != i) w *= (xi - x[j]) / (x[i] - x[j]);
    }
    sum += w * y[i];
  }
  return sum;
}

double lagrange_derivative(const double* x, const double* y, int n, double xi) {
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double denom = 1.0;
    for (int j = 0; j < n; ++j) {
      if (j != i) denom *= x[i] - x[j];
    }
    // d/dxi of prod_{j != i} (xi - x_j)
    double num = 0.0;
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      double t = 1.0;
      for (int j = 0; j < n; ++j) {
        if (j != i && j != k) t *= xi - x[j];
      }
      num += t;
    }
    sum += y[i] * num / denom;
  }
  return sum;
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw std::invalid_argument("MonotoneCubic: bad data");
  for (size_t i = 0; i + 1 < n; ++i) {
    if (!(x_[i + 1] > x_[i])) {
      throw std::invalid_argument("MonotoneCubic: abscissae must increase strictly");
    }
  }
  std::vector<double> h(n - 1), delta(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    delta[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  d_.assign(n, 0.0);
  if (n == 2) {
    d_[0] = d_[1] = delta[0];
    return;
  }
  for (size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] > 0.0) {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (d * d0 <= 0.0) return 0.0;
    if (d0 * d1 <= 0.0 && std::abs(d) > 3.0 * std::abs(d0)) return 3.0 * d0;
    return d;
  };
  d_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
  d_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

double MonotoneCubic::operator()(double xi) const {
  const size_t n = x_.size();
  if (xi <= x_[0]) return y_[0] + d_[0] * (xi - x_[0]);
  if (xi >= x_[n - 1]) return y_[n - 1] + d_[n - 1] * (xi - x_[n - 1]);
  const int k = locate(x_, xi);
  const double h = x_[k + 1] - x_[k];
  const double t = (xi - x_[k]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y_[k] + (t3 - 2 * t2 + t) * h * d_[k] +
         (-2 * t3 + 3 * t2) * y_[k + 1] + (t3 - t2) * h * d_[k + 1];
}

double MonotoneCubic::derivative(double xi) const {
  const size_t n = x_.size();
  if (xi <= x_[0]) return d_[0];
  if (xi >= x_[n - 1]) return d_[n - 1];
  const int k = locate(x_, xi);
  const double h = x_[k + 1] - x_[k];
  const double t = (xi - x_[k]) / h;
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * y_[k] + (-6 * t2 + 6 * t) * y_[k + 1]) / h +
         (3 * t2 - 4 * t + 1) * d_[k] + (3 * t2 - 2 * t) * d_[k + 1];
}

GridInterpolator::GridInterpolator(const std::vector<double>& x0,
                                   const std::vector<double>& x1, const Field2D& f)
    : x0_(x0), x1_(x1), f_(f) {
  if (static_cast<int>(x0.size()) != f.n0() || static_cast<int>(x1.size()) != f.n1()) {
    throw std::invalid_argument("GridInterpolator: grid and field sizes differ");
  }
}

namespace {
// First index of a stencil of width w around interval k, inside [0, n).
int stencil_start(int k, int n, int w) {
  return std::clamp(k - (w / 2 - 1), 0, std::max(0, n - w));
}
}  // namespace

double lagrange_interp(const std::vector<double>& x, const std::vector<double>& y, double xi) {
  const int n = static_cast<int>(x.size());
  if (static_cast<int>(y.size()) != n) throw std::invalid_argument("lagrange_interp: size mismatch");
  const int w = std::min(4, n);
  const int s = stencil_start(locate(x, xi), n, w);
  return lagrange(&x[s], &y[s], w, xi);
}

double lagrange_slope(const std::vector<double>& x, const std::vector<double>& y, double xi) {
  const int n = static_cast<int>(x.size());
  if (static_cast<int>(y.size()) != n) throw std::invalid_argument("lagrange_slope: size mismatch");
  const int w = std::min(4, n);
  const int s = stencil_start(locate(x, xi), n, w);
  return lagrange_derivative(&x[s], &y[s], w, xi);
}

std::vector<double> cumulative_cubic(const std::vector<double>& x, const std::vector<double>& y,
                                     int first, int lo) {
  const int n = static_cast<int>(x.size());
  if (static_cast<int>(y.size()) != n) throw std::invalid_argument("cumulative_cubic: size mismatch");
  if (first < lo || first >= n || lo < 0) throw std::invalid_argument("cumulative_cubic: bad start");
  std::vector<double> out(n, 0.0);
  const int w = std::min(4, n - lo);
  auto cell = [&](int i) {
    // integral over [x[i], x[i+1]]
    const int s = std::clamp(i - 1, lo, n - w);
    auto f = [&](double t) { return lagrange(&x[s], &y[s], w, t); };
    return boost::math::quadrature::gauss<double, 3>::integrate(f, x[i], x[i + 1]);
  };
  for (int i = first; i + 1 < n; ++i) out[i + 1] = out[i] + cell(i);
  for (int i = first - 1; i >= lo; --i) out[i] = out[i + 1] - cell(i);
  return out;
}

double GridInterpolator::operator()(double a, double b) const {
  const int n0 = static_cast<int>(x0_.size());
  const int n1 = static_cast<int>(x1_.size());
  const int w0 = std::min(4, n0), w1 = std::min(4, n1);
  const int s0 = stencil_start(locate(x0_, a), n0, w0);
  const int s1 = stencil_start(locate(x1_, b), n1, w1);
  double col[4];
  for (int i = 0; i < w0; ++i) {
    double row[4];
    for (int j = 0; j < w1; ++j) row[j] = f_(s0 + i, s1 + j);
    col[i] = lagrange(&x1_[s1], row, w1, b);
  }
  return lagrange(&x0_[s0], col, w0, a);
}

}  // namespace laval
