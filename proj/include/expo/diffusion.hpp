#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "expo/mlp.hpp"
#include "expo/rng.hpp"

namespace expo {

// Variance-preserving noise schedule over T discrete steps:
//   alpha_bar(t) = exp(-bmin*(t/T) - 0.5*(bmax-bmin)*(t/T)^2), t = 1..T,
// with per-step alpha_t = alpha_bar_t / alpha_bar_{t-1} and beta_t = 1-alpha_t.
struct VpSchedule {
  int T = 0;
  std::vector<double> alpha_bar;  // index t-1 holds alpha_bar_t
  std::vector<double> alpha;      // per-step alpha_t
  std::vector<double> beta;       // 1 - alpha_t

  static VpSchedule make(int T, double beta_min = 0.1, double beta_max = 10.0);
};

// Sinusoidal embedding of a denoising step index, dimension `dim` (even).
std::vector<double> timestep_embedding(int t, int T, int dim);

constexpr int kTimestepEmbedDim = 16;

// Conditional noise-prediction policy: a residual MLP taking
// (noisy action, state, timestep embedding) -> predicted noise, plus the VP
// schedule used for corruption and reverse-process sampling.
class DiffusionPolicy {
 public:
  DiffusionPolicy() = default;
  DiffusionPolicy(int state_dim, int action_dim, int hidden, int blocks, int T);

  void init(Rng& rng);

  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  const VpSchedule& schedule() const { return sched_; }

  ResidualMlp& net() { return net_; }
  const ResidualMlp& net() const { return net_; }

  // Builds the (noisy action | state | timestep embedding) input rows.
  Mat make_input(const Mat& noisy_actions, const Mat& states, std::span<const int> ts) const;

  // Mean over the batch of ||eps - eps_net(corrupted, s, t)||^2 with t uniform
  // in {1..T} and eps ~ N(0,I), built on the tape for gradient flow.
  // Out-params capture the draws so tests can reconstruct the loss exactly.
  Var ddpm_loss(Tape& tape, TapedNet& taped, const Mat& states, const Mat& actions, Rng& rng,
                std::vector<int>* ts_out = nullptr, Mat* eps_out = nullptr) const;

  // Convenience: forward-only loss value (no tape), same sampling contract.
  double ddpm_loss_value(const Mat& states, const Mat& actions, Rng& rng) const;

  // T reverse steps from a_T ~ N(0,I); final action clipped to [-1,1]^d.
  std::vector<double> sample(std::span<const double> state, Rng& rng) const;

  // n independent draws via distinct rng substreams; rows of the result.
  Mat sample_batch(std::span<const double> state, int n, Rng& rng) const;

  // Reverse process for many states at once (one draw per row of `states`).
  Mat sample_rows(const Mat& states, Rng& rng) const;

 private:
  int state_dim_ = 0, action_dim_ = 0;
  VpSchedule sched_;
  ResidualMlp net_;
};

}  // namespace expo
