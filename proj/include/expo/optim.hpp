#pragma once

#include <cstdint>
#include <vector>

#include "expo/param.hpp"

namespace expo {

// Adam with bias correction. Moment buffers match the parameter count; the
// step counter is shared across all coordinates.
struct AdamState {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;

  AdamState() = default;
  AdamState(std::size_t n, double learning_rate);
};

void adam_step(AdamState& st, ParamVector& params, const ParamVector& grads);

// target <- (1 - tau) * target + tau * online. tau weighs the online
// parameters; tau in (0, 1] (tau = 1 copies online exactly).
ParamVector polyak_update(const ParamVector& target, const ParamVector& online, double tau);
void polyak_update_inplace(ParamVector& target, const ParamVector& online, double tau);

}  // namespace expo
