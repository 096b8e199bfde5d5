#include "expo/normalizer.hpp"

#include <algorithm>
#include <cmath>

#include "expo/errors.hpp"

namespace expo {

void Normalizer::fit(const Mat& rows) {
  if (rows.rows == 0) throw UsageError("normalizer fit on empty data");
  const int n = rows.rows, d = rows.cols;
  mean_.assign(d, 0.0);
  std_.assign(d, 0.0);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < d; ++c) mean_[c] += rows.at(r, c);
  for (int c = 0; c < d; ++c) mean_[c] /= n;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < d; ++c) {
      double dv = rows.at(r, c) - mean_[c];
      std_[c] += dv * dv;
    }
  for (int c = 0; c < d; ++c) std_[c] = std::max(std::sqrt(std_[c] / n), kStdFloor);
}

std::vector<double> Normalizer::apply(std::span<const double> v) const {
  if (!fitted()) return {v.begin(), v.end()};
  if (v.size() != mean_.size()) throw ConfigError("normalizer dimension mismatch");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - mean_[i]) / std_[i];
  return out;
}

Mat Normalizer::apply_rows(const Mat& rows) const {
  if (!fitted()) return rows;
  if (rows.cols != dim()) throw ConfigError("normalizer dimension mismatch");
  Mat out(rows.rows, rows.cols);
  for (int r = 0; r < rows.rows; ++r)
    for (int c = 0; c < rows.cols; ++c) out.at(r, c) = (rows.at(r, c) - mean_[c]) / std_[c];
  return out;
}

ParamVector Normalizer::to_params() const {
  if (!fitted()) throw UsageError("normalizer not fitted");
  ParamVector p = ParamVector::raw(static_cast<std::uint32_t>(2 * mean_.size()));
  for (std::size_t i = 0; i < mean_.size(); ++i) {
    p[i] = mean_[i];
    p[mean_.size() + i] = std_[i];
  }
  return p;
}

Normalizer Normalizer::from_params(const ParamVector& p) {
  if (p.layout().size() != 1 || p.size() % 2 != 0)
    throw ConfigError("normalizer parameter block must be a raw even-length vector");
  Normalizer n;
  const std::size_t d = p.size() / 2;
  n.mean_.assign(p.data(), p.data() + d);
  n.std_.assign(p.data() + d, p.data() + 2 * d);
  for (double s : n.std_)
    if (!(s > 0.0)) throw ConfigError("normalizer standard deviations must be positive");
  return n;
}

}  // namespace expo
