#include "expo/edit.hpp"

#include <algorithm>
#include <cmath>

#include "expo/errors.hpp"

namespace expo {

namespace {

constexpr double kLog2 = 0.6931471805599453;
constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * log(2*pi)

// log(1 - tanh(u)^2) = 2 * (log 2 - u - softplus(-2u)), numerically stable.
double log1m_tanh2(double u) {
  double sp = u > -20.0 ? std::log1p(std::exp(-2.0 * u)) : -2.0 * u;
  return 2.0 * (kLog2 - u - sp);
}

}  // namespace

EditPolicy::EditPolicy(int state_dim, int action_dim, int hidden, int hidden_layers, double beta,
                       bool condition_on_action, double dropout, double alpha_lr)
    : state_dim_(state_dim),
      action_dim_(action_dim),
      beta_(beta),
      cond_action_(condition_on_action),
      dropout_(dropout),
      h_target_(-static_cast<double>(action_dim)),
      alpha_opt_(1, alpha_lr) {
  if (state_dim <= 0 || action_dim <= 0) throw ConfigError("edit policy dims must be positive");
  if (beta < 0.0) throw ConfigError("edit scale beta must be >= 0");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
  int in = state_dim + (condition_on_action ? action_dim : 0);
  net_ = Mlp::make(static_cast<std::uint32_t>(in), static_cast<std::uint32_t>(hidden),
                   hidden_layers, static_cast<std::uint32_t>(2 * action_dim));
}

void EditPolicy::init(Rng& rng) { net_.init(rng, /*small_final=*/true); }

void EditPolicy::set_alpha(double a) {
  if (a <= 0.0) throw ConfigError("alpha must be positive");
  log_alpha_ = std::log(a);
}

void EditPolicy::stats(std::span<const double> state, std::span<const double> base_action,
                       std::vector<double>& mean, std::vector<double>& logstd) const {
  std::vector<double> in(state.begin(), state.end());
  if (cond_action_) in.insert(in.end(), base_action.begin(), base_action.end());
  auto out = net_.forward(in);
  mean.assign(out.begin(), out.begin() + action_dim_);
  logstd.assign(out.begin() + action_dim_, out.end());
  for (double& v : logstd) v = std::clamp(v, kLogStdMin, kLogStdMax);
}

EditSample EditPolicy::sample_edit(std::span<const double> state,
                                   std::span<const double> base_action, Rng& rng) const {
  EditSample s;
  s.edit.assign(action_dim_, 0.0);
  if (beta_ == 0.0) return s;  // edits disabled
  std::vector<double> mean, logstd;
  stats(state, base_action, mean, logstd);
  double logp = 0.0;
  for (int j = 0; j < action_dim_; ++j) {
    double z = rng.normal();
    double u = mean[j] + std::exp(logstd[j]) * z;
    s.edit[j] = beta_ * std::tanh(u);
    logp += -0.5 * z * z - logstd[j] - kHalfLog2Pi;  // Gaussian density of u
    logp -= std::log(beta_) + log1m_tanh2(u);        // change of variables
  }
  s.log_prob = logp;
  return s;
}

Mat EditPolicy::sample_edit_rows(const Mat& states, const Mat& base_actions, Rng& rng) const {
  if (states.rows != base_actions.rows) throw ConfigError("batch row mismatch");
  Mat out(states.rows, action_dim_);
  if (beta_ == 0.0) return out;
  for (int r = 0; r < states.rows; ++r) {
    EditSample s = sample_edit(states.row(r), base_actions.row(r), rng);
    std::copy(s.edit.begin(), s.edit.end(),
              out.d.begin() + static_cast<std::size_t>(r) * action_dim_);
  }
  return out;
}

Var EditPolicy::edit_loss(Tape& tape, TapedNet& taped, const Mat& states, const Mat& base_actions,
                          const std::function<Var(Tape&, Var)>& q_of_edited, double alpha,
                          Rng& rng, double* mean_logp_out) const {
  if (states.rows == 0) throw UsageError("edit_loss: empty batch");
  if (beta_ <= 0.0) throw UsageError("edit_loss with edits disabled (beta = 0)");
  const int B = states.rows, d = action_dim_;

  Mat in(B, state_dim_ + (cond_action_ ? d : 0));
  for (int r = 0; r < B; ++r) {
    double* row = in.d.data() + static_cast<std::size_t>(r) * in.cols;
    std::copy_n(states.d.data() + static_cast<std::size_t>(r) * state_dim_, state_dim_, row);
    if (cond_action_)
      std::copy_n(base_actions.d.data() + static_cast<std::size_t>(r) * d, d, row + state_dim_);
  }

  // Forward with parameter leaves, inserting inverted dropout on hidden
  // activations when configured.
  auto slices = dense_slices(net_.params());
  taped = TapedNet{};
  Var h = tape.constant(std::move(in));
  for (std::size_t li = 0; li < slices.size(); ++li) {
    const auto& s = slices[li];
    Mat w(static_cast<int>(s.in), static_cast<int>(s.out));
    std::copy_n(net_.params().data() + s.w_off, w.size(), w.d.begin());
    Mat b(1, static_cast<int>(s.out));
    std::copy_n(net_.params().data() + s.b_off, s.out, b.d.begin());
    Var wv = tape.leaf(std::move(w));
    Var bv = tape.leaf(std::move(b));
    taped.param_vars.push_back(wv);
    taped.param_vars.push_back(bv);
    h = tape.linear(h, wv, bv);
    bool hidden = li + 1 < slices.size();
    if (hidden) {
      h = tape.relu(h);
      if (dropout_ > 0.0) {
        Mat mask(B, static_cast<int>(s.out));
        double keep = 1.0 - dropout_;
        for (double& m : mask.d) m = rng.uniform() < keep ? 1.0 / keep : 0.0;
        h = tape.mul(h, tape.constant(std::move(mask)));
      }
    }
  }
  taped.out = h;

  Var mean = tape.slice_cols(h, 0, d);
  Var logstd = tape.clamp(tape.slice_cols(h, d, 2 * d), kLogStdMin, kLogStdMax);
  Var std_ = tape.exp_(logstd);

  Mat z(B, d);
  rng.normal_fill(z.d);
  Var zc = tape.constant(z);
  Var u = tape.add(mean, tape.mul(std_, zc));
  Var edit = tape.scale(tape.tanh_(u), beta_);
  Var edited = tape.clamp(tape.add(tape.constant(base_actions), edit), -1.0, 1.0);

  Var q = q_of_edited(tape, edited);
  if (tape.val(q).rows != B || tape.val(q).cols != 1)
    throw ConfigError("edit_loss: critic callback must return a (B x 1) column");

  // log pi per row. The Gaussian term reduces to -logstd plus constants under
  // reparameterization (the -z^2/2 part carries no parameter gradient); the
  // tanh/scale correction flows through u.
  Mat zconst(B, d);
  for (std::size_t i = 0; i < zconst.size(); ++i)
    zconst.d[i] = -0.5 * z.d[i] * z.d[i] - kHalfLog2Pi - std::log(beta_);
  Var sp = tape.softplus(tape.scale(u, -2.0));
  Var tanh_corr = tape.add_scalar(tape.scale(tape.add(u, sp), -2.0), 2.0 * kLog2);
  Var logp_elems = tape.sub(tape.sub(tape.constant(std::move(zconst)), logstd), tanh_corr);
  Var logp_rows = tape.rowsum(logp_elems);
  if (mean_logp_out) *mean_logp_out = tape.scalar(tape.mean_all(logp_rows));

  return tape.mean_all(tape.sub(tape.scale(logp_rows, alpha), q));
}

double EditPolicy::alpha_update(double mean_logp) {
  // J(log a) = -a * (mean_logp + H_target);  dJ/dlog a = -a * (mean_logp + H_target)
  ParamVector p = ParamVector::raw(1);
  p[0] = log_alpha_;
  ParamVector g = ParamVector::raw(1);
  g[0] = -std::exp(log_alpha_) * (mean_logp + h_target_);
  adam_step(alpha_opt_, p, g);
  log_alpha_ = p[0];
  return std::exp(log_alpha_);
}

std::vector<double> edited_action(std::span<const double> base, std::span<const double> edit) {
  std::vector<double> out(base.size());
  for (std::size_t i = 0; i < base.size(); ++i)
    out[i] = std::clamp(base[i] + edit[i], -1.0, 1.0);
  return out;
}

}  // namespace expo
