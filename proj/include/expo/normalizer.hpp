#pragma once

#include <span>
#include <vector>

#include "expo/mat.hpp"
#include "expo/param.hpp"

namespace expo {

// Per-coordinate z-score transform for states. Identity until fitted; once
// fitted on a dataset it is frozen (network inputs must not drift mid-run).
// Standard deviations are floored so near-constant coordinates stay tame.
class Normalizer {
 public:
  static constexpr double kStdFloor = 1e-3;

  Normalizer() = default;

  // Column-wise mean and (population) standard deviation of `rows`.
  void fit(const Mat& rows);

  bool fitted() const { return !mean_.empty(); }
  int dim() const { return static_cast<int>(mean_.size()); }
  std::span<const double> mean() const { return mean_; }
  std::span<const double> stddev() const { return std_; }

  std::vector<double> apply(std::span<const double> v) const;
  Mat apply_rows(const Mat& rows) const;

  // Raw-layout parameter block [mean | std] for checkpointing.
  ParamVector to_params() const;
  static Normalizer from_params(const ParamVector& p);

 private:
  std::vector<double> mean_, std_;
};

}  // namespace expo
