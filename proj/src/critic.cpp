#include "expo/critic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "expo/errors.hpp"
#include "expo/optim.hpp"

namespace expo {

CriticEnsemble::CriticEnsemble(int state_dim, int action_dim, int hidden, int hidden_layers,
                               int K, int M, double gamma, double tau)
    : state_dim_(state_dim), action_dim_(action_dim), m_(M), gamma_(gamma), tau_(tau) {
  if (K < 1) throw ConfigError("ensemble size K must be >= 1");
  if (M < 1 || M > K) throw ConfigError("subset size M must satisfy 1 <= M <= K");
  if (gamma < 0.0 || gamma > 1.0) throw ConfigError("discount gamma must lie in [0, 1]");
  if (tau <= 0.0 || tau > 1.0) throw ConfigError("polyak tau must lie in (0, 1]");
  for (int k = 0; k < K; ++k) {
    online_.push_back(Mlp::make(static_cast<std::uint32_t>(state_dim + action_dim),
                                static_cast<std::uint32_t>(hidden), hidden_layers, 1));
    target_.push_back(online_.back());
  }
}

void CriticEnsemble::init(Rng& rng) {
  for (std::size_t k = 0; k < online_.size(); ++k) {
    online_[k].init(rng, /*small_final=*/true);
    target_[k] = online_[k];
  }
}

Mat CriticEnsemble::join(const Mat& states, const Mat& actions) const {
  if (states.rows != actions.rows) throw ConfigError("critic batch row mismatch");
  if (states.cols != state_dim_ || actions.cols != action_dim_)
    throw ConfigError("critic input width mismatch");
  Mat in(states.rows, state_dim_ + action_dim_);
  for (int r = 0; r < in.rows; ++r) {
    double* row = in.d.data() + static_cast<std::size_t>(r) * in.cols;
    std::copy_n(states.d.data() + static_cast<std::size_t>(r) * state_dim_, state_dim_, row);
    std::copy_n(actions.d.data() + static_cast<std::size_t>(r) * action_dim_, action_dim_,
                row + state_dim_);
  }
  return in;
}

double CriticEnsemble::q_value(int k, std::span<const double> s, std::span<const double> a,
                               bool use_target) const {
  std::vector<double> in(s.begin(), s.end());
  in.insert(in.end(), a.begin(), a.end());
  const Mlp& net = use_target ? target_[k] : online_[k];
  return net.forward(in)[0];
}

double CriticEnsemble::q_mean(std::span<const double> s, std::span<const double> a,
                              bool use_target) const {
  double sum = 0.0;
  for (int k = 0; k < K(); ++k) sum += q_value(k, s, a, use_target);
  return sum / K();
}

std::vector<double> CriticEnsemble::q_mean_rows(const Mat& states, const Mat& actions,
                                                bool use_target) const {
  Mat in = join(states, actions);
  std::vector<double> out(states.rows, 0.0);
  const auto& nets = use_target ? target_ : online_;
  for (const Mlp& net : nets) {
    Mat q = net.forward_batch(in);
    for (int r = 0; r < q.rows; ++r) out[r] += q.at(r, 0);
  }
  for (double& v : out) v /= K();
  return out;
}

double CriticEnsemble::target_value(std::span<const double> s, std::span<const double> a,
                                    Rng& rng) const {
  // Partial Fisher-Yates draw of M distinct indices.
  std::vector<int> idx(online_.size());
  std::iota(idx.begin(), idx.end(), 0);
  double best = 0.0;
  for (int i = 0; i < m_; ++i) {
    std::size_t j = i + rng.uniform_int(idx.size() - i);
    std::swap(idx[i], idx[j]);
    double q = q_value(idx[i], s, a, /*use_target=*/true);
    if (i == 0 || q < best) best = q;
  }
  return best;
}

std::vector<double> CriticEnsemble::td_targets(const Mat& s_next, const Mat& a_star,
                                               std::span<const double> r,
                                               std::span<const double> done, Rng& rng) const {
  if (static_cast<int>(r.size()) != s_next.rows || static_cast<int>(done.size()) != s_next.rows)
    throw ConfigError("td_targets: reward/done length mismatch");
  // All K target evaluations batched once; the per-row M-subset min then reads
  // from the (B x K) table.
  Mat in = join(s_next, a_star);
  Mat table(s_next.rows, K());
  for (int k = 0; k < K(); ++k) {
    Mat q = target_[k].forward_batch(in);
    for (int row = 0; row < q.rows; ++row) table.at(row, k) = q.at(row, 0);
  }
  std::vector<int> idx(online_.size());
  std::vector<double> y(s_next.rows);
  for (int row = 0; row < s_next.rows; ++row) {
    std::iota(idx.begin(), idx.end(), 0);
    double best = 0.0;
    for (int i = 0; i < m_; ++i) {
      std::size_t j = i + rng.uniform_int(idx.size() - i);
      std::swap(idx[i], idx[j]);
      double q = table.at(row, idx[i]);
      if (i == 0 || q < best) best = q;
    }
    y[row] = r[row] + gamma_ * (1.0 - done[row]) * best;
  }
  return y;
}

Var CriticEnsemble::td_loss(Tape& tape, std::vector<TapedNet>& taped, const Mat& states,
                            const Mat& actions, std::span<const double> y) const {
  if (states.rows == 0) throw UsageError("td_loss: empty batch");
  if (static_cast<int>(y.size()) != states.rows) throw ConfigError("td_loss: target length mismatch");
  Var in = tape.constant(join(states, actions));
  Mat ym(states.rows, 1);
  std::copy(y.begin(), y.end(), ym.d.begin());
  Var yv = tape.constant(std::move(ym));
  taped.clear();
  Var acc;
  for (int k = 0; k < K(); ++k) {
    taped.push_back(online_[k].apply(tape, in));
    Var sq = tape.sum_all(tape.square(tape.sub(yv, taped.back().out)));
    acc = k == 0 ? sq : tape.add(acc, sq);
  }
  return tape.scale(acc, 1.0 / (static_cast<double>(states.rows) * K()));
}

double CriticEnsemble::td_loss_value(const Mat& states, const Mat& actions,
                                     std::span<const double> y) const {
  if (states.rows == 0) throw UsageError("td_loss: empty batch");
  Mat in = join(states, actions);
  double acc = 0.0;
  for (int k = 0; k < K(); ++k) {
    Mat q = online_[k].forward_batch(in);
    for (int r = 0; r < q.rows; ++r) {
      double diff = y[r] - q.at(r, 0);
      acc += diff * diff;
    }
  }
  return acc / (static_cast<double>(states.rows) * K());
}

Var CriticEnsemble::taped_q_mean_frozen(Tape& tape, const Mat& states, Var actions) const {
  if (tape.val(actions).rows != states.rows || tape.val(actions).cols != action_dim_)
    throw ConfigError("taped q: action shape mismatch");
  Var in = tape.concat_cols(std::array<Var, 2>{tape.constant(states), actions});
  Var acc;
  for (int k = 0; k < K(); ++k) {
    TapedNet net = online_[k].apply(tape, in, /*train_params=*/false);
    acc = k == 0 ? net.out : tape.add(acc, net.out);
  }
  return tape.scale(acc, 1.0 / K());
}

void CriticEnsemble::update_targets() {
  for (std::size_t k = 0; k < online_.size(); ++k)
    polyak_update_inplace(target_[k].params(), online_[k].params(), tau_);
}

}  // namespace expo
