#pragma once

#include <functional>
#include <span>
#include <vector>

#include "expo/mlp.hpp"
#include "expo/optim.hpp"
#include "expo/rng.hpp"

namespace expo {

struct EditSample {
  std::vector<double> edit;  // |edit_j| <= beta by construction
  double log_prob = 0.0;
};

// Squashed-Gaussian edit policy: net(state, base action) -> (mean, log std),
// edit = beta * tanh(u) with u ~ N(mean, diag(std^2)). Log-density includes
// the squash-and-scale change of variables. With condition_on_action = false
// and beta = 1 the same class is a standard tanh-Gaussian actor over states.
class EditPolicy {
 public:
  EditPolicy() = default;
  EditPolicy(int state_dim, int action_dim, int hidden, int hidden_layers, double beta,
             bool condition_on_action = true, double dropout = 0.0, double alpha_lr = 3e-4);

  void init(Rng& rng);

  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  double beta() const { return beta_; }
  bool condition_on_action() const { return cond_action_; }
  double dropout() const { return dropout_; }

  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

  static constexpr double kLogStdMin = -10.0;
  static constexpr double kLogStdMax = 2.0;

  // Mean and clamped log-std heads for one (state, base action) pair.
  void stats(std::span<const double> state, std::span<const double> base_action,
             std::vector<double>& mean, std::vector<double>& logstd) const;

  EditSample sample_edit(std::span<const double> state, std::span<const double> base_action,
                         Rng& rng) const;

  // Batched draws: one edit per row of (states, base_actions).
  Mat sample_edit_rows(const Mat& states, const Mat& base_actions, Rng& rng) const;

  // Entropy-regularized Q-maximization loss, Eq.-(2) form:
  //   loss = mean_batch( alpha * log pi(edit|s,a) - Q(s, clip(a + edit)) ).
  // q_of_edited maps the taped edited actions (B x d) to Q-values (B x 1);
  // the callee must treat its own parameters as frozen. Reparameterized
  // sampling; base actions are constants. Dropout (if configured) is active
  // here only.
  Var edit_loss(Tape& tape, TapedNet& taped, const Mat& states, const Mat& base_actions,
                const std::function<Var(Tape&, Var)>& q_of_edited, double alpha, Rng& rng,
                double* mean_logp_out = nullptr) const;

  // Temperature auto-tuning: one Adam step on log(alpha) minimizing
  // -alpha * (mean_logp + target_entropy). Returns the updated alpha.
  double alpha_update(double mean_logp);

  double alpha() const { return std::exp(log_alpha_); }
  double target_entropy() const { return h_target_; }
  void set_alpha(double a);

 private:
  int state_dim_ = 0, action_dim_ = 0;
  double beta_ = 0.0;
  bool cond_action_ = true;
  double dropout_ = 0.0;
  double h_target_ = 0.0;
  double log_alpha_ = 0.0;
  AdamState alpha_opt_;
  Mlp net_;
};

// clip(base + edit, -1, 1) per coordinate.
std::vector<double> edited_action(std::span<const double> base, std::span<const double> edit);

}  // namespace expo
