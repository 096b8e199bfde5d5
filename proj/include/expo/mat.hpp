#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace expo {

// Dense row-major matrix of doubles. The single numeric container used by the
// tape, the networks, and the batched policy paths.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> d;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), d(static_cast<std::size_t>(r) * c, 0.0) {}
  Mat(int r, int c, std::vector<double> vals) : rows(r), cols(c), d(std::move(vals)) {}

  double& at(int r, int c) { return d[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return d[static_cast<std::size_t>(r) * cols + c]; }

  std::span<double> row(int r) { return {d.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)}; }
  std::span<const double> row(int r) const { return {d.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)}; }

  std::size_t size() const { return d.size(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

  static Mat row_vector(std::span<const double> v) {
    Mat m(1, static_cast<int>(v.size()));
    m.d.assign(v.begin(), v.end());
    return m;
  }
};

// C += A(m,k) * B(k,n)
void gemm_acc(const Mat& a, const Mat& b, Mat& c);
// C += A(m,k) * B(n,k)^T
void gemm_nt_acc(const Mat& a, const Mat& b, Mat& c);
// C += A(m,k)^T * B(m,n)  -> (k,n)
void gemm_tn_acc(const Mat& a, const Mat& b, Mat& c);

Mat matmul(const Mat& a, const Mat& b);

}  // namespace expo
