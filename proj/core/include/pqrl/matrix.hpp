#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pqrl/errors.hpp"
#include "pqrl/rng.hpp"

namespace pqrl {

// Dense row-major double matrix. Token matrices are L rows (tokens) by
// d columns (embedding width); vectors are 1xd rows.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  static Mat identity(std::size_t n);
  static Mat uniform(std::size_t rows, std::size_t cols, double lo, double hi, Rng& rng);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return a_.size(); }
  bool empty() const { return a_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }
  double* data() { return a_.data(); }
  const double* data() const { return a_.data(); }
  double& at_flat(std::size_t i) { return a_[i]; }
  double at_flat(std::size_t i) const { return a_[i]; }

  bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  std::string shape_str() const;

  void fill(double v) { a_.assign(a_.size(), v); }
  bool all_finite() const;

  Mat& operator+=(const Mat& o);
  Mat& operator*=(double s);

  friend bool operator==(const Mat& x, const Mat& y) {
    return x.rows_ == y.rows_ && x.cols_ == y.cols_ && x.a_ == y.a_;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

// C = A * B; throws ShapeError naming both shapes when inner dims disagree.
Mat matmul(const Mat& a, const Mat& b);
// C = A * B^T.
Mat matmul_nt(const Mat& a, const Mat& b);
// C = A^T * B.
Mat matmul_tn(const Mat& a, const Mat& b);
Mat add(const Mat& a, const Mat& b);
Mat scale(const Mat& a, double s);
double frobenius_dot(const Mat& a, const Mat& b);

}  // namespace pqrl
