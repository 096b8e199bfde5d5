#include "expo/diffusion.hpp"

#include <algorithm>
#include <cmath>

#include "expo/errors.hpp"

namespace expo {

VpSchedule VpSchedule::make(int T, double beta_min, double beta_max) {
  if (T < 1) throw ConfigError("denoising step count must be >= 1");
  VpSchedule s;
  s.T = T;
  s.alpha_bar.resize(T);
  s.alpha.resize(T);
  s.beta.resize(T);
  double prev = 1.0;  // alpha_bar at t = 0
  for (int t = 1; t <= T; ++t) {
    double u = static_cast<double>(t) / T;
    double ab = std::exp(-beta_min * u - 0.5 * (beta_max - beta_min) * u * u);
    s.alpha_bar[t - 1] = ab;
    s.alpha[t - 1] = ab / prev;
    s.beta[t - 1] = 1.0 - s.alpha[t - 1];
    prev = ab;
  }
  return s;
}

std::vector<double> timestep_embedding(int t, int T, int dim) {
  (void)T;
  std::vector<double> emb(dim);
  int half = dim / 2;
  for (int i = 0; i < half; ++i) {
    double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) / half);
    emb[2 * i] = std::sin(t * freq);
    emb[2 * i + 1] = std::cos(t * freq);
  }
  return emb;
}

DiffusionPolicy::DiffusionPolicy(int state_dim, int action_dim, int hidden, int blocks, int T)
    : state_dim_(state_dim),
      action_dim_(action_dim),
      sched_(VpSchedule::make(T)),
      net_(static_cast<std::uint32_t>(action_dim + state_dim + kTimestepEmbedDim),
           static_cast<std::uint32_t>(hidden), blocks, static_cast<std::uint32_t>(action_dim)) {
  if (state_dim <= 0 || action_dim <= 0) throw ConfigError("policy dims must be positive");
}

void DiffusionPolicy::init(Rng& rng) { net_.init(rng); }

Mat DiffusionPolicy::make_input(const Mat& noisy_actions, const Mat& states,
                                std::span<const int> ts) const {
  if (noisy_actions.rows != states.rows) throw ConfigError("batch row mismatch");
  if (noisy_actions.cols != action_dim_ || states.cols != state_dim_)
    throw ConfigError("diffusion input width mismatch");
  if (ts.size() != static_cast<std::size_t>(noisy_actions.rows) && ts.size() != 1)
    throw ConfigError("one timestep per row (or a single broadcast value) required");
  Mat in(noisy_actions.rows, action_dim_ + state_dim_ + kTimestepEmbedDim);
  for (int r = 0; r < in.rows; ++r) {
    int t = ts.size() == 1 ? ts[0] : ts[r];
    auto emb = timestep_embedding(t, sched_.T, kTimestepEmbedDim);
    double* row = in.d.data() + static_cast<std::size_t>(r) * in.cols;
    std::copy_n(noisy_actions.d.data() + static_cast<std::size_t>(r) * action_dim_, action_dim_,
                row);
    std::copy_n(states.d.data() + static_cast<std::size_t>(r) * state_dim_, state_dim_,
                row + action_dim_);
    std::copy_n(emb.data(), kTimestepEmbedDim, row + action_dim_ + state_dim_);
  }
  return in;
}

namespace {

// Shared draw contract between the taped and forward-only loss paths: per row,
// first the timestep, then the noise coordinates.
void draw_corruption(const VpSchedule& sched, const Mat& actions, Rng& rng, std::vector<int>& ts,
                     Mat& eps, Mat& corrupted) {
  int B = actions.rows, d = actions.cols;
  ts.resize(B);
  eps = Mat(B, d);
  corrupted = Mat(B, d);
  for (int r = 0; r < B; ++r) {
    ts[r] = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(sched.T)));
    double ab = sched.alpha_bar[ts[r] - 1];
    double sa = std::sqrt(ab), sn = std::sqrt(1.0 - ab);
    for (int c = 0; c < d; ++c) {
      double e = rng.normal();
      eps.at(r, c) = e;
      corrupted.at(r, c) = sa * actions.at(r, c) + sn * e;
    }
  }
}

}  // namespace

Var DiffusionPolicy::ddpm_loss(Tape& tape, TapedNet& taped, const Mat& states, const Mat& actions,
                               Rng& rng, std::vector<int>* ts_out, Mat* eps_out) const {
  if (states.rows == 0) throw UsageError("ddpm_loss: empty batch");
  std::vector<int> ts;
  Mat eps, corrupted;
  draw_corruption(sched_, actions, rng, ts, eps, corrupted);
  Mat in = make_input(corrupted, states, ts);
  taped = net_.apply(tape, tape.constant(std::move(in)));
  Var err = tape.sub(tape.constant(eps), taped.out);
  Var loss = tape.scale(tape.sum_all(tape.square(err)), 1.0 / states.rows);
  if (ts_out) *ts_out = std::move(ts);
  if (eps_out) *eps_out = std::move(eps);
  return loss;
}

double DiffusionPolicy::ddpm_loss_value(const Mat& states, const Mat& actions, Rng& rng) const {
  if (states.rows == 0) throw UsageError("ddpm_loss: empty batch");
  std::vector<int> ts;
  Mat eps, corrupted;
  draw_corruption(sched_, actions, rng, ts, eps, corrupted);
  Mat pred = net_.forward_batch(make_input(corrupted, states, ts));
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double diff = eps.d[i] - pred.d[i];
    s += diff * diff;
  }
  return s / states.rows;
}

Mat DiffusionPolicy::sample_rows(const Mat& states, Rng& rng) const {
  if (states.cols != state_dim_) throw ConfigError("state width mismatch");
  int B = states.rows, d = action_dim_;
  Mat a(B, d);
  rng.normal_fill(a.d);  // a_T ~ N(0, I)
  for (int t = sched_.T; t >= 1; --t) {
    double ab = sched_.alpha_bar[t - 1];
    double alpha = sched_.alpha[t - 1];
    double beta = sched_.beta[t - 1];
    double coef = beta / std::sqrt(1.0 - ab);
    double inv_sqrt_alpha = 1.0 / std::sqrt(alpha);
    double sigma = std::sqrt(beta);
    int ts[1] = {t};
    Mat pred = net_.forward_batch(make_input(a, states, ts));
    for (std::size_t i = 0; i < a.size(); ++i) a.d[i] = inv_sqrt_alpha * (a.d[i] - coef * pred.d[i]);
    if (t > 1)
      for (double& x : a.d) x += sigma * rng.normal();
  }
  for (double& x : a.d) x = std::clamp(x, -1.0, 1.0);
  return a;
}

std::vector<double> DiffusionPolicy::sample(std::span<const double> state, Rng& rng) const {
  Mat out = sample_rows(Mat::row_vector(state), rng);
  return out.d;
}

Mat DiffusionPolicy::sample_batch(std::span<const double> state, int n, Rng& rng) const {
  if (n < 1) throw ConfigError("sample count must be >= 1");
  Mat out(n, action_dim_);
  for (int i = 0; i < n; ++i) {
    Rng sub = rng.split(static_cast<std::uint64_t>(i));
    auto a = sample(state, sub);
    std::copy(a.begin(), a.end(), out.d.begin() + static_cast<std::size_t>(i) * action_dim_);
  }
  return out;
}

}  // namespace expo
