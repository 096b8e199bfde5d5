#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "expo/critic.hpp"
#include "expo/diffusion.hpp"
#include "expo/edit.hpp"
#include "expo/env.hpp"
#include "expo/normalizer.hpp"
#include "expo/optim.hpp"
#include "expo/otf.hpp"
#include "expo/replay.hpp"

namespace expo {

// Exactly one variant is active per agent.
//   full           the complete method
//   no_edit        candidate sets hold base samples only; the edit policy is
//                  neither used nor trained
//   sample_backup  TD targets use one base-policy sample instead of the
//                  argmax over candidates (rollouts keep the full selection)
//   gaussian_sac   entropy-regularized tanh-Gaussian actor-critic on the same
//                  critic/replay stack (reference point, no base policy)
enum class AblationVariant { full, no_edit, sample_backup, gaussian_sac };

enum class RunMode { online, offline_to_online };

AblationVariant parse_variant(const std::string& name);
RunMode parse_mode(const std::string& name);
const char* variant_name(AblationVariant v);
const char* mode_name(RunMode m);

struct AgentConfig {
  int state_dim = 0;
  int action_dim = 0;

  int hidden = 256;       // width of every network
  int base_blocks = 3;    // residual blocks in the base policy
  int edit_layers = 3;    // hidden layers in the edit policy
  int critic_layers = 3;  // hidden layers per critic
  int T = 10;             // denoising steps

  double lr = 3e-4;
  int batch = 256;
  double gamma = 0.99;
  double tau = 0.005;
  int K = 10;  // critic ensemble size
  int M = 2;   // min over M random targets
  int N = 8;   // candidate pairs per state
  int G = 20;  // critic updates per env step
  double beta = 0.7;
  double dropout = 0.0;
  double alpha_init = 1.0;

  std::size_t buffer_capacity = 1000000;
  AblationVariant variant = AblationVariant::full;
  RunMode mode = RunMode::online;
  int pretrain_steps = 0;
  bool symmetric_sampling = false;  // 50/50 offline/online mini-batches
  bool rollout_q_target = false;    // score rollout candidates with target nets
};

// Range-checks every hyperparameter (dimensions included); throws ConfigError.
void validate_agent_config(const AgentConfig& cfg);

struct StepMetrics {
  double reward = 0.0;
  bool episode_end = false;
  double episode_return = 0.0;   // total reward of the episode that just ended
  double mean_q_selected = 0.0;  // mean selected-candidate Q over the step's backups
  double edited_win_frac = 0.0;  // fraction of backups won by an edited candidate
  double alpha = 0.0;
  double base_loss = 0.0;        // imitation loss on the last mini-batch
  double edit_loss = 0.0;        // actor loss on the last mini-batch (0 if skipped)
  double td_loss = 0.0;          // mean critic loss over the G updates
};

// The full training loop: act with argmax-over-candidates selection, store
// the executed action, then per env step run G critic updates (each followed
// by a target update) and one base + one edit update on the G-th mini-batch.
class ExpoAgent {
 public:
  ExpoAgent(const AgentConfig& cfg, Rng& rng);

  // Installs the offline dataset and freezes normalization statistics on it.
  void seed_buffer(const std::vector<Transition>& dataset);

  // Imitation-only updates of the base policy on buffer mini-batches; critic
  // and edit policy stay at initialization. Returns the per-step loss trace.
  std::vector<double> pretrain(int steps, Rng& rng);

  // Collects n transitions by rolling out the current policy, then freezes
  // normalization statistics on them (when not already frozen).
  void warm_start(Env& env, int n_transitions, Rng& rng);

  StepMetrics train_step(Env& env, Rng& rng);

  // Greedy rollouts without parameter updates; mean episode score.
  double evaluate(Env& env, int n_episodes, Rng& rng) const;

  // One imitation update of the base policy on an explicit mini-batch. Part
  // of train_step; public so the value-gradient-free property is assertable.
  double update_base(const BatchMats& batch, Rng& rng);

  void save(const std::filesystem::path& dir) const;
  void load(const std::filesystem::path& dir);

  const AgentConfig& config() const { return cfg_; }
  DiffusionPolicy& base() { return base_; }
  EditPolicy& edit() { return edit_; }
  CriticEnsemble& critic() { return critic_; }
  ReplayBuffer& buffer() { return buffer_; }
  const Normalizer& normalizer() const { return norm_; }

  long env_steps() const { return env_steps_; }
  long critic_updates() const { return n_critic_; }
  long target_updates() const { return n_target_; }
  long base_updates() const { return n_base_; }
  long edit_updates() const { return n_edit_; }
  // Update order of the most recent train_step: 'c' critic, 't' target,
  // 'b' base, 'e' edit.
  const std::string& last_update_sequence() const { return last_sequence_; }

 private:
  std::vector<Transition> sample_batch(Rng& rng) const;
  std::vector<double> act_rollout(std::span<const double> raw_state, Rng& rng);
  std::vector<double> act_greedy(std::span<const double> raw_state, Rng& rng) const;
  double update_critics(const BatchMats& batch, Rng& rng, double* sel_q, double* sel_frac);
  double update_edit(const BatchMats& batch, Rng& rng);
  bool edit_in_use() const;

  AgentConfig cfg_;
  DiffusionPolicy base_;
  EditPolicy edit_;
  CriticEnsemble critic_;
  ReplayBuffer buffer_;
  Normalizer norm_;
  OtfConfig rollout_cfg_, backup_cfg_;

  AdamState base_opt_, edit_opt_;
  std::vector<AdamState> critic_opt_;

  std::vector<double> cur_state_;
  bool episode_active_ = false;
  double episode_return_ = 0.0;

  long env_steps_ = 0;
  long n_critic_ = 0, n_target_ = 0, n_base_ = 0, n_edit_ = 0;
  std::string last_sequence_;
};

}  // namespace expo
