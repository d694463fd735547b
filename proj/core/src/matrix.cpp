#include "pqrl/matrix.hpp"

#include <cmath>

namespace pqrl {

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::uniform(std::size_t rows, std::size_t cols, double lo, double hi, Rng& rng) {
  Mat m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.at_flat(i) = rng.uniform(lo, hi);
  return m;
}

std::string Mat::shape_str() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

bool Mat::all_finite() const {
  for (double v : a_)
    if (!std::isfinite(v)) return false;
  return true;
}

Mat& Mat::operator+=(const Mat& o) {
  if (!same_shape(o)) throw ShapeError("add: shape " + shape_str() + " vs " + o.shape_str());
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
  return *this;
}

Mat& Mat::operator*=(double s) {
  for (double& v : a_) v *= s;
  return *this;
}

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: lhs " + a.shape_str() + " incompatible with rhs " + b.shape_str());
  Mat c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Mat matmul_nt(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols())
    throw ShapeError("matmul_nt: lhs " + a.shape_str() + " incompatible with rhs^T " + b.shape_str());
  Mat c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
      c(i, j) = s;
    }
  return c;
}

Mat matmul_tn(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows())
    throw ShapeError("matmul_tn: lhs^T " + a.shape_str() + " incompatible with rhs " + b.shape_str());
  Mat c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k)
    for (std::size_t i = 0; i < a.cols(); ++i) {
      double aki = a(k, i);
      if (aki == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aki * b(k, j);
    }
  return c;
}

Mat add(const Mat& a, const Mat& b) {
  Mat c = a;
  c += b;
  return c;
}

Mat scale(const Mat& a, double s) {
  Mat c = a;
  c *= s;
  return c;
}

double frobenius_dot(const Mat& a, const Mat& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.at_flat(i) * b.at_flat(i);
  return s;
}

}  // namespace pqrl
