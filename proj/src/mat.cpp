#include "expo/mat.hpp"

#include <cassert>

namespace expo {

// ikj loop order keeps the inner loop contiguous in both B and C.
void gemm_acc(const Mat& a, const Mat& b, Mat& c) {
  assert(a.cols == b.rows && c.rows == a.rows && c.cols == b.cols);
  const int m = a.rows, k = a.cols, n = b.cols;
  for (int i = 0; i < m; ++i) {
    const double* arow = a.d.data() + static_cast<std::size_t>(i) * k;
    double* crow = c.d.data() + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b.d.data() + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_nt_acc(const Mat& a, const Mat& b, Mat& c) {
  assert(a.cols == b.cols && c.rows == a.rows && c.cols == b.rows);
  const int m = a.rows, k = a.cols, n = b.rows;
  for (int i = 0; i < m; ++i) {
    const double* arow = a.d.data() + static_cast<std::size_t>(i) * k;
    double* crow = c.d.data() + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* brow = b.d.data() + static_cast<std::size_t>(j) * k;
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] += acc;
    }
  }
}

void gemm_tn_acc(const Mat& a, const Mat& b, Mat& c) {
  assert(a.rows == b.rows && c.rows == a.cols && c.cols == b.cols);
  const int m = a.rows, k = a.cols, n = b.cols;
  for (int r = 0; r < m; ++r) {
    const double* arow = a.d.data() + static_cast<std::size_t>(r) * k;
    const double* brow = b.d.data() + static_cast<std::size_t>(r) * n;
    for (int i = 0; i < k; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c.d.data() + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

Mat matmul(const Mat& a, const Mat& b) {
  Mat c(a.rows, b.cols);
  gemm_acc(a, b, c);
  return c;
}

}  // namespace expo
