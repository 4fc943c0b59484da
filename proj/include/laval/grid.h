#pragma once

#include <vector>

namespace laval {

enum class ClusterEnd { lower, upper };

// n cells of uniform width on [a, b].
std::vector<double> uniform_nodes(double a, double b, int n);

// n cells on [a, b] whose widths grow geometrically away from `end`. The
// growth ratio is `ratio`, reduced if needed so that the largest cell is at
// most `max_stretch` times the smallest. With the cap active the node map is a
// fixed smooth function of i/n, so refinement stays consistent.
std::vector<double> graded_nodes(double a, double b, int n, double ratio,
                                 double max_stretch, ClusterEnd end);

// Row-major scalar field on an (n0 x n1) node set.
class Field2D {
 public:
  Field2D() = default;
  Field2D(int n0, int n1, double value = 0.0)
      : n0_(n0), n1_(n1), data_(static_cast<size_t>(n0) * n1, value) {}

  int n0() const { return n0_; }
  int n1() const { return n1_; }
  double& operator()(int i, int j) { return data_[static_cast<size_t>(i) * n1_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<size_t>(i) * n1_ + j]; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }
  bool empty() const { return data_.empty(); }

 private:
  int n0_ = 0;
  int n1_ = 0;
  std::vector<double> data_;
};

}  // namespace laval
