#include "expo/agent.hpp"

#include <cmath>
#include <cstdint>
#include <utility>

#include "expo/errors.hpp"

namespace expo {

AblationVariant parse_variant(const std::string& name) {
  if (name == "full") return AblationVariant::full;
  if (name == "no_edit") return AblationVariant::no_edit;
  if (name == "sample_backup") return AblationVariant::sample_backup;
  if (name == "gaussian_sac") return AblationVariant::gaussian_sac;
  throw ConfigError("unknown variant '" + name +
                    "' (expected full, no_edit, sample_backup, or gaussian_sac)");
}

RunMode parse_mode(const std::string& name) {
  if (name == "online") return RunMode::online;
  if (name == "offline_to_online") return RunMode::offline_to_online;
  throw ConfigError("unknown mode '" + name + "' (expected online or offline_to_online)");
}

const char* variant_name(AblationVariant v) {
  switch (v) {
    case AblationVariant::full: return "full";
    case AblationVariant::no_edit: return "no_edit";
    case AblationVariant::sample_backup: return "sample_backup";
    case AblationVariant::gaussian_sac: return "gaussian_sac";
  }
  return "?";
}

const char* mode_name(RunMode m) {
  return m == RunMode::online ? "online" : "offline_to_online";
}

void validate_agent_config(const AgentConfig& c) {
  if (c.state_dim < 1 || c.action_dim < 1)
    throw ConfigError("agent dimensions must be positive");
  if (c.hidden < 1 || c.base_blocks < 0 || c.edit_layers < 0 || c.critic_layers < 0)
    throw ConfigError("network sizes must be non-negative (hidden positive)");
  if (c.T < 1) throw ConfigError("denoising steps T must be >= 1");
  if (!(c.lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (c.batch < 1) throw ConfigError("batch size must be >= 1");
  if (c.N < 1) throw ConfigError("candidate pair count N must be >= 1");
  if (c.G < 1) throw ConfigError("critic updates per step G must be >= 1");
  if (c.beta < 0.0) throw ConfigError("edit scale beta must be >= 0");
  if (c.dropout < 0.0 || c.dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
  if (!(c.alpha_init > 0.0)) throw ConfigError("alpha_init must be positive");
  if (c.buffer_capacity < 1) throw ConfigError("buffer capacity must be >= 1");
  if (c.pretrain_steps < 0) throw ConfigError("pretrain_steps must be >= 0");
  // Mirrors the critic ensemble's own constructor checks so that invalid
  // values are rejected at config load, before any network is built.
  if (c.K < 1) throw ConfigError("ensemble size K must be >= 1");
  if (c.M < 1 || c.M > c.K) throw ConfigError("subset size M must satisfy 1 <= M <= K");
  if (c.gamma < 0.0 || c.gamma > 1.0) throw ConfigError("discount gamma must lie in [0, 1]");
  if (c.tau <= 0.0 || c.tau > 1.0) throw ConfigError("polyak tau must lie in (0, 1]");
}

namespace {

Mat states_matrix(const std::vector<Transition>& data, int state_dim) {
  Mat m(static_cast<int>(data.size()), state_dim);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < state_dim; ++j) m.at(i, j) = data[static_cast<std::size_t>(i)].s[j];
  return m;
}

}  // namespace

ExpoAgent::ExpoAgent(const AgentConfig& cfg, Rng& rng)
    : cfg_((validate_agent_config(cfg), cfg)),
      base_(cfg.state_dim, cfg.action_dim, cfg.hidden, cfg.base_blocks, cfg.T),
      edit_(cfg.state_dim, cfg.action_dim, cfg.hidden, cfg.edit_layers,
            cfg.variant == AblationVariant::gaussian_sac ? 1.0 : cfg.beta,
            /*condition_on_action=*/cfg.variant != AblationVariant::gaussian_sac,
            cfg.variant == AblationVariant::gaussian_sac ? 0.0 : cfg.dropout,
            /*alpha_lr=*/cfg.lr),
      critic_(cfg.state_dim, cfg.action_dim, cfg.hidden, cfg.critic_layers, cfg.K, cfg.M,
              cfg.gamma, cfg.tau),
      buffer_(cfg.buffer_capacity, cfg.state_dim, cfg.action_dim) {
  base_.init(rng);
  edit_.init(rng);
  critic_.init(rng);
  edit_.set_alpha(cfg_.alpha_init);

  const bool edits_in_candidates = cfg_.variant != AblationVariant::no_edit;
  rollout_cfg_ = OtfConfig{cfg_.N,
                           cfg_.rollout_q_target ? QSource::target_mean : QSource::online_mean,
                           edits_in_candidates};
  backup_cfg_ = OtfConfig{cfg_.N, QSource::target_mean, edits_in_candidates};

  base_opt_ = AdamState(base_.net().params().size(), cfg_.lr);
  edit_opt_ = AdamState(edit_.net().params().size(), cfg_.lr);
  critic_opt_.reserve(static_cast<std::size_t>(cfg_.K));
  for (int k = 0; k < cfg_.K; ++k)
    critic_opt_.emplace_back(critic_.online(k).params().size(), cfg_.lr);
}

bool ExpoAgent::edit_in_use() const {
  switch (cfg_.variant) {
    case AblationVariant::no_edit: return false;
    case AblationVariant::gaussian_sac: return true;
    default: return cfg_.beta > 0.0;  // beta = 0 pins every edit at zero; nothing to train
  }
}

void ExpoAgent::seed_buffer(const std::vector<Transition>& dataset) {
  if (dataset.empty()) throw UsageError("offline dataset is empty");
  buffer_.seed(dataset);
  norm_.fit(states_matrix(dataset, cfg_.state_dim));
}

std::vector<Transition> ExpoAgent::sample_batch(Rng& rng) const {
  const std::size_t batch = static_cast<std::size_t>(cfg_.batch);
  if (cfg_.symmetric_sampling && buffer_.offline_count() > 0 &&
      buffer_.count() > buffer_.offline_count())
    return buffer_.sample_symmetric(batch, rng);
  return buffer_.sample(batch, rng);
}

std::vector<double> ExpoAgent::pretrain(int steps, Rng& rng) {
  if (steps < 0) throw UsageError("pretrain step count must be >= 0");
  if (steps == 0) return {};
  // The Gaussian baseline has no imitation stage; its actor trains online only.
  if (cfg_.variant == AblationVariant::gaussian_sac) return {};
  if (buffer_.count() == 0)
    throw UsageError("pretraining needs data: seed the buffer with a dataset first");

  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    BatchMats m = to_mats(buffer_.sample(static_cast<std::size_t>(cfg_.batch), rng));
    trace.push_back(update_base(m, rng));
  }
  return trace;
}

void ExpoAgent::warm_start(Env& env, int n_transitions, Rng& rng) {
  if (n_transitions < 0) throw UsageError("warm-start transition count must be >= 0");
  if (n_transitions == 0) return;

  std::vector<Transition> collected;
  collected.reserve(static_cast<std::size_t>(n_transitions));
  std::vector<double> s = env.reset(rng);
  for (int i = 0; i < n_transitions; ++i) {
    std::vector<double> a = act_rollout(s, rng);
    StepResult sr = env.step(a);
    collected.push_back(Transition{s, std::move(a), sr.reward, sr.state, sr.terminal});
    s = sr.done ? env.reset(rng) : std::move(sr.state);
  }
  for (Transition& t : collected) buffer_.push(std::move(t));
  if (!norm_.fitted()) {
    // Rebuild from the buffer tail so moved-from transitions are not touched.
    Mat states(n_transitions, cfg_.state_dim);
    const std::size_t first = buffer_.count() - static_cast<std::size_t>(n_transitions);
    for (int i = 0; i < n_transitions; ++i)
      for (int j = 0; j < cfg_.state_dim; ++j)
        states.at(i, j) = buffer_.at(first + static_cast<std::size_t>(i)).s[j];
    norm_.fit(states);
  }
}

std::vector<double> ExpoAgent::act_rollout(std::span<const double> raw_state, Rng& rng) {
  std::vector<double> s = norm_.apply(raw_state);
  if (cfg_.variant == AblationVariant::gaussian_sac) {
    std::vector<double> zero(static_cast<std::size_t>(cfg_.action_dim), 0.0);
    EditSample es = edit_.sample_edit(s, zero, rng);
    return edited_action(zero, es.edit);
  }
  return act(s, base_, edit_, critic_, rollout_cfg_, rng).action;
}

std::vector<double> ExpoAgent::act_greedy(std::span<const double> raw_state, Rng& rng) const {
  std::vector<double> s = norm_.apply(raw_state);
  if (cfg_.variant == AblationVariant::gaussian_sac) {
    std::vector<double> zero(static_cast<std::size_t>(cfg_.action_dim), 0.0);
    std::vector<double> mean, logstd;
    edit_.stats(s, zero, mean, logstd);
    std::vector<double> a(mean.size());
    for (std::size_t j = 0; j < mean.size(); ++j) a[j] = std::tanh(mean[j]);
    return a;
  }
  return act(s, base_, edit_, critic_, rollout_cfg_, rng).action;
}

double ExpoAgent::update_critics(const BatchMats& batch, Rng& rng, double* sel_q,
                                 double* sel_frac) {
  const int B = batch.s.rows;
  Mat s = norm_.apply_rows(batch.s);
  Mat sp = norm_.apply_rows(batch.s_next);

  Mat a_star;
  std::vector<double> logp;  // Gaussian baseline only
  *sel_q = 0.0;
  *sel_frac = 0.0;
  switch (cfg_.variant) {
    case AblationVariant::full:
    case AblationVariant::no_edit: {
      BackupSelection sel = select_backup_actions(sp, base_, edit_, critic_, backup_cfg_, rng);
      a_star = std::move(sel.actions);
      *sel_q = sel.mean_q;
      *sel_frac = sel.edited_win_frac;
      break;
    }
    case AblationVariant::sample_backup: {
      a_star = base_.sample_rows(sp, rng);
      std::vector<double> qs = critic_.q_mean_rows(sp, a_star, /*use_target=*/true);
      for (double q : qs) *sel_q += q;
      *sel_q /= B;
      break;
    }
    case AblationVariant::gaussian_sac: {
      std::vector<double> zero(static_cast<std::size_t>(cfg_.action_dim), 0.0);
      a_star = Mat(B, cfg_.action_dim);
      logp.resize(static_cast<std::size_t>(B));
      for (int i = 0; i < B; ++i) {
        EditSample es = edit_.sample_edit(sp.row(i), zero, rng);
        std::vector<double> a = edited_action(zero, es.edit);
        for (int j = 0; j < cfg_.action_dim; ++j) a_star.at(i, j) = a[static_cast<std::size_t>(j)];
        logp[static_cast<std::size_t>(i)] = es.log_prob;
      }
      std::vector<double> qs = critic_.q_mean_rows(sp, a_star, /*use_target=*/true);
      for (double q : qs) *sel_q += q;
      *sel_q /= B;
      break;
    }
  }

  std::vector<double> y = critic_.td_targets(sp, a_star, batch.r, batch.done, rng);
  if (cfg_.variant == AblationVariant::gaussian_sac) {
    const double alpha = edit_.alpha();
    for (int i = 0; i < B; ++i)
      y[static_cast<std::size_t>(i)] -= cfg_.gamma *
                                        (1.0 - batch.done[static_cast<std::size_t>(i)]) * alpha *
                                        logp[static_cast<std::size_t>(i)];
  }

  Tape tape;
  std::vector<TapedNet> taped;
  Var loss = critic_.td_loss(tape, taped, s, batch.a, y);
  tape.backward(loss);
  for (int k = 0; k < cfg_.K; ++k) {
    ParamVector g = collect_grad(tape, taped[static_cast<std::size_t>(k)],
                                 critic_.online(k).params());
    adam_step(critic_opt_[static_cast<std::size_t>(k)], critic_.online(k).params(), g);
  }
  ++n_critic_;
  last_sequence_ += 'c';

  critic_.update_targets();
  ++n_target_;
  last_sequence_ += 't';
  return tape.scalar(loss);
}

double ExpoAgent::update_base(const BatchMats& batch, Rng& rng) {
  Mat s = norm_.apply_rows(batch.s);
  Tape tape;
  TapedNet taped;
  Var loss = base_.ddpm_loss(tape, taped, s, batch.a, rng);
  tape.backward(loss);
  ParamVector g = collect_grad(tape, taped, base_.net().params());
  adam_step(base_opt_, base_.net().params(), g);
  ++n_base_;
  last_sequence_ += 'b';
  return tape.scalar(loss);
}

double ExpoAgent::update_edit(const BatchMats& batch, Rng& rng) {
  Mat s = norm_.apply_rows(batch.s);
  Mat bases = cfg_.variant == AblationVariant::gaussian_sac
                  ? Mat(s.rows, cfg_.action_dim)
                  : base_.sample_rows(s, rng);
  Tape tape;
  TapedNet taped;
  double mean_logp = 0.0;
  auto q_fn = [&](Tape& t, Var acts) { return critic_.taped_q_mean_frozen(t, s, acts); };
  Var loss = edit_.edit_loss(tape, taped, s, bases, q_fn, edit_.alpha(), rng, &mean_logp);
  tape.backward(loss);
  ParamVector g = collect_grad(tape, taped, edit_.net().params());
  adam_step(edit_opt_, edit_.net().params(), g);
  edit_.alpha_update(mean_logp);
  ++n_edit_;
  last_sequence_ += 'e';
  return tape.scalar(loss);
}

StepMetrics ExpoAgent::train_step(Env& env, Rng& rng) {
  if (buffer_.count() == 0)
    throw UsageError("train_step needs replay data: seed a dataset or warm-start first");

  if (!episode_active_) {
    cur_state_ = env.reset(rng);
    episode_active_ = true;
    episode_return_ = 0.0;
  }

  StepMetrics out;
  last_sequence_.clear();

  // Act, store the executed action (the selected candidate, not a base draw).
  std::vector<double> action = act_rollout(cur_state_, rng);
  StepResult sr = env.step(action);
  buffer_.push(Transition{cur_state_, std::move(action), sr.reward, sr.state, sr.terminal});
  ++env_steps_;
  episode_return_ += sr.reward;
  out.reward = sr.reward;
  if (sr.done) {
    episode_active_ = false;
    out.episode_end = true;
    out.episode_return = episode_return_;
  } else {
    cur_state_ = std::move(sr.state);
  }

  // G critic updates, each immediately followed by its target update; the
  // base and edit policies train once, on the G-th mini-batch.
  BatchMats last;
  double td_sum = 0.0, q_sum = 0.0, frac_sum = 0.0;
  for (int g = 0; g < cfg_.G; ++g) {
    BatchMats m = to_mats(sample_batch(rng));
    double sq = 0.0, sf = 0.0;
    td_sum += update_critics(m, rng, &sq, &sf);
    q_sum += sq;
    frac_sum += sf;
    if (g + 1 == cfg_.G) last = std::move(m);
  }
  out.td_loss = td_sum / cfg_.G;
  out.mean_q_selected = q_sum / cfg_.G;
  out.edited_win_frac = frac_sum / cfg_.G;

  if (cfg_.variant != AblationVariant::gaussian_sac) out.base_loss = update_base(last, rng);
  if (edit_in_use()) out.edit_loss = update_edit(last, rng);
  out.alpha = edit_.alpha();
  return out;
}

double ExpoAgent::evaluate(Env& env, int n_episodes, Rng& rng) const {
  if (n_episodes < 1) throw UsageError("evaluation needs at least one episode");
  double sum = 0.0;
  for (int ep = 0; ep < n_episodes; ++ep) {
    Rng er = rng.split(static_cast<std::uint64_t>(ep));
    std::vector<double> s = env.reset(er);
    double total = 0.0;
    while (true) {
      StepResult sr = env.step(act_greedy(s, er));
      total += sr.reward;
      if (sr.done) break;
      s = std::move(sr.state);
    }
    sum += env.episode_score(total);
  }
  return sum / n_episodes;
}

void ExpoAgent::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  save_checkpoint(dir / "base.ckpt", base_.net().params());
  save_checkpoint(dir / "edit.ckpt", edit_.net().params());
  for (int k = 0; k < cfg_.K; ++k) {
    save_checkpoint(dir / ("critic_" + std::to_string(k) + ".ckpt"),
                    critic_.online(k).params());
    save_checkpoint(dir / ("target_" + std::to_string(k) + ".ckpt"),
                    critic_.target(k).params());
  }
  ParamVector alpha = ParamVector::raw(1);
  alpha[0] = edit_.alpha();
  save_checkpoint(dir / "alpha.ckpt", alpha);
  if (norm_.fitted()) save_checkpoint(dir / "norm.ckpt", norm_.to_params());
}

void ExpoAgent::load(const std::filesystem::path& dir) {
  auto load_into = [](const std::filesystem::path& path, ParamVector& dst) {
    ParamVector v = load_checkpoint(path);
    if (!v.same_layout(dst))
      throw IoError("checkpoint does not match the configured network: " + path.string());
    dst = std::move(v);
  };
  load_into(dir / "base.ckpt", base_.net().params());
  load_into(dir / "edit.ckpt", edit_.net().params());
  for (int k = 0; k < cfg_.K; ++k) {
    load_into(dir / ("critic_" + std::to_string(k) + ".ckpt"), critic_.online(k).params());
    load_into(dir / ("target_" + std::to_string(k) + ".ckpt"), critic_.target(k).params());
  }
  ParamVector alpha = load_checkpoint(dir / "alpha.ckpt");
  if (alpha.size() != 1 || !(alpha[0] > 0.0))
    throw IoError("corrupt temperature checkpoint: " + (dir / "alpha.ckpt").string());
  edit_.set_alpha(alpha[0]);

  const std::filesystem::path norm_path = dir / "norm.ckpt";
  if (std::filesystem::exists(norm_path)) {
    Normalizer n = Normalizer::from_params(load_checkpoint(norm_path));
    if (n.dim() != cfg_.state_dim)
      throw IoError("normalizer checkpoint dimension mismatch: " + norm_path.string());
    norm_ = n;
  } else {
    norm_ = Normalizer{};
  }
}

}  // namespace expo
