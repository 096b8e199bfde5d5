#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "expo/mlp.hpp"
#include "expo/rng.hpp"

namespace expo {

// K online Q-networks with Polyak-averaged targets. Targets regress all K
// online networks to a shared y built from the min over a random M-subset of
// the target ensemble; actor-facing signals use ensemble means.
class CriticEnsemble {
 public:
  CriticEnsemble() = default;
  CriticEnsemble(int state_dim, int action_dim, int hidden, int hidden_layers, int K, int M,
                 double gamma, double tau);

  void init(Rng& rng);

  int K() const { return static_cast<int>(online_.size()); }
  int M() const { return m_; }
  double gamma() const { return gamma_; }
  double tau() const { return tau_; }
  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }

  Mlp& online(int k) { return online_[k]; }
  const Mlp& online(int k) const { return online_[k]; }
  Mlp& target(int k) { return target_[k]; }
  const Mlp& target(int k) const { return target_[k]; }

  // Single-pair evaluations.
  double q_value(int k, std::span<const double> s, std::span<const double> a,
                 bool use_target = false) const;
  double q_mean(std::span<const double> s, std::span<const double> a,
                bool use_target = false) const;

  // Batched mean over the ensemble, one value per row.
  std::vector<double> q_mean_rows(const Mat& states, const Mat& actions,
                                  bool use_target = false) const;

  // Min over a uniformly random M-subset of the target networks.
  double target_value(std::span<const double> s, std::span<const double> a, Rng& rng) const;

  // TD targets y_i = r_i + gamma * (1 - done_i) * min_{M-subset} Q'(s'_i, a*_i),
  // one fresh subset draw per row. Pure (no tape, no gradients).
  std::vector<double> td_targets(const Mat& s_next, const Mat& a_star,
                                 std::span<const double> r, std::span<const double> done,
                                 Rng& rng) const;

  // Mean over batch and over all K online networks of (y - Q_k(s,a))^2, with
  // y constant. Fills one TapedNet per online network for gradient collection.
  Var td_loss(Tape& tape, std::vector<TapedNet>& taped, const Mat& states, const Mat& actions,
              std::span<const double> y) const;

  // Convenience for hand-checks: same loss without a tape.
  double td_loss_value(const Mat& states, const Mat& actions, std::span<const double> y) const;

  // Taped mean of the K online critics at (states, actions-Var), parameters
  // frozen; used as the edit policy's maximization signal.
  Var taped_q_mean_frozen(Tape& tape, const Mat& states, Var actions) const;

  // Polyak step for every online/target pair.
  void update_targets();

 private:
  Mat join(const Mat& states, const Mat& actions) const;

  int state_dim_ = 0, action_dim_ = 0, m_ = 0;
  double gamma_ = 0.99, tau_ = 0.005;
  std::vector<Mlp> online_, target_;
};

}  // namespace expo
