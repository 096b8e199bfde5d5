#include "expo/mlp.hpp"

#include <cmath>

#include "expo/errors.hpp"

namespace expo {

namespace {

void apply_act_inplace(Mat& m, Act a) {
  switch (a) {
    case Act::relu:
      for (double& x : m.d) x = x > 0.0 ? x : 0.0;
      break;
    case Act::tanh:
      for (double& x : m.d) x = std::tanh(x);
      break;
    case Act::identity:
      break;
  }
}

Mat dense_forward(const Mat& x, const ParamVector& p, const DenseSlice& s) {
  Mat out(x.rows, static_cast<int>(s.out));
  const double* b = p.data() + s.b_off;
  for (int r = 0; r < out.rows; ++r)
    for (int c = 0; c < out.cols; ++c) out.at(r, c) = b[c];
  Mat w(static_cast<int>(s.in), static_cast<int>(s.out));
  std::copy(p.data() + s.w_off, p.data() + s.w_off + w.size(), w.d.begin());
  gemm_acc(x, w, out);
  return out;
}

struct TapedDense {
  Var w, b;
};

TapedDense push_dense(Tape& t, const ParamVector& p, const DenseSlice& s, bool train) {
  Mat w(static_cast<int>(s.in), static_cast<int>(s.out));
  std::copy(p.data() + s.w_off, p.data() + s.w_off + w.size(), w.d.begin());
  Mat b(1, static_cast<int>(s.out));
  std::copy(p.data() + s.b_off, p.data() + s.b_off + s.out, b.d.begin());
  if (train) return {t.leaf(std::move(w)), t.leaf(std::move(b))};
  return {t.constant(std::move(w)), t.constant(std::move(b))};
}

}  // namespace

void init_dense_chain(ParamVector& p, Rng& rng, bool small_final, double small_scale) {
  auto slices = dense_slices(p);
  for (std::size_t i = 0; i < slices.size(); ++i) {
    const auto& s = slices[i];
    bool last = (i + 1 == slices.size());
    double bound = (last && small_final) ? small_scale : 1.0 / std::sqrt(static_cast<double>(s.in));
    for (std::size_t j = 0; j < static_cast<std::size_t>(s.in) * s.out; ++j)
      p[s.w_off + j] = rng.uniform(-bound, bound);
    for (std::size_t j = 0; j < s.out; ++j) p[s.b_off + j] = 0.0;
  }
}

Mlp::Mlp(std::vector<std::uint32_t> widths, std::vector<Act> acts) : acts_(std::move(acts)) {
  if (widths.size() < 2) throw ConfigError("Mlp needs at least one layer");
  if (acts_.size() != widths.size() - 1) throw ConfigError("Mlp: one activation per layer required");
  params_ = ParamVector::dense_chain(widths);
  widths_ = std::move(widths);
}

Mlp Mlp::make(std::uint32_t in, std::uint32_t hidden, int hidden_layers, std::uint32_t out) {
  if (hidden_layers < 0) throw ConfigError("negative hidden layer count");
  std::vector<std::uint32_t> widths{in};
  std::vector<Act> acts;
  for (int i = 0; i < hidden_layers; ++i) {
    widths.push_back(hidden);
    acts.push_back(Act::relu);
  }
  widths.push_back(out);
  acts.push_back(Act::identity);
  return Mlp(std::move(widths), std::move(acts));
}

void Mlp::init(Rng& rng, bool small_final) { init_dense_chain(params_, rng, small_final); }

Mat Mlp::forward_batch(const Mat& x) const {
  if (x.cols != static_cast<int>(in_dim())) throw ConfigError("Mlp forward: input width mismatch");
  auto slices = dense_slices(params_);
  Mat h = dense_forward(x, params_, slices[0]);
  apply_act_inplace(h, acts_[0]);
  for (std::size_t i = 1; i < slices.size(); ++i) {
    h = dense_forward(h, params_, slices[i]);
    apply_act_inplace(h, acts_[i]);
  }
  return h;
}

std::vector<double> Mlp::forward(std::span<const double> in) const {
  Mat out = forward_batch(Mat::row_vector(in));
  return out.d;
}

TapedNet Mlp::apply(Tape& t, Var x, bool train_params) const {
  auto slices = dense_slices(params_);
  TapedNet net;
  Var h = x;
  for (std::size_t i = 0; i < slices.size(); ++i) {
    TapedDense d = push_dense(t, params_, slices[i], train_params);
    if (train_params) {
      net.param_vars.push_back(d.w);
      net.param_vars.push_back(d.b);
    }
    h = t.linear(h, d.w, d.b);
    if (acts_[i] == Act::relu) h = t.relu(h);
    else if (acts_[i] == Act::tanh) h = t.tanh_(h);
  }
  net.out = h;
  return net;
}

ResidualMlp::ResidualMlp(std::uint32_t in, std::uint32_t hidden, int blocks, std::uint32_t out)
    : in_(in), hidden_(hidden), out_(out), blocks_(blocks) {
  if (blocks < 0) throw ConfigError("negative residual block count");
  std::vector<std::uint32_t> widths{in, hidden};
  for (int i = 0; i < blocks; ++i) {
    widths.push_back(hidden);
    widths.push_back(hidden);
  }
  widths.push_back(out);
  params_ = ParamVector::dense_chain(std::move(widths));
}

void ResidualMlp::init(Rng& rng, bool small_final) { init_dense_chain(params_, rng, small_final); }

Mat ResidualMlp::forward_batch(const Mat& x) const {
  if (x.cols != static_cast<int>(in_)) throw ConfigError("ResidualMlp forward: input width mismatch");
  auto slices = dense_slices(params_);
  Mat h = dense_forward(x, params_, slices[0]);
  apply_act_inplace(h, Act::relu);
  for (int b = 0; b < blocks_; ++b) {
    Mat t1 = dense_forward(h, params_, slices[1 + 2 * b]);
    apply_act_inplace(t1, Act::relu);
    Mat t2 = dense_forward(t1, params_, slices[2 + 2 * b]);
    for (std::size_t i = 0; i < h.size(); ++i) h.d[i] += t2.d[i];
  }
  return dense_forward(h, params_, slices.back());
}

std::vector<double> ResidualMlp::forward(std::span<const double> in) const {
  Mat out = forward_batch(Mat::row_vector(in));
  return out.d;
}

TapedNet ResidualMlp::apply(Tape& t, Var x, bool train_params) const {
  auto slices = dense_slices(params_);
  TapedNet net;
  auto dense = [&](Var h, const DenseSlice& s) {
    TapedDense d = push_dense(t, params_, s, train_params);
    if (train_params) {
      net.param_vars.push_back(d.w);
      net.param_vars.push_back(d.b);
    }
    return t.linear(h, d.w, d.b);
  };
  Var h = t.relu(dense(x, slices[0]));
  for (int b = 0; b < blocks_; ++b) {
    Var t1 = t.relu(dense(h, slices[1 + 2 * b]));
    Var t2 = dense(t1, slices[2 + 2 * b]);
    h = t.add(h, t2);
  }
  net.out = dense(h, slices.back());
  return net;
}

ParamVector collect_grad(const Tape& t, const TapedNet& net, const ParamVector& like) {
  ParamVector g = like.layout().size() == 1 ? ParamVector::raw(like.layout()[0])
                                            : ParamVector::dense_chain(like.layout());
  auto slices = dense_slices(like);
  if (net.param_vars.size() != slices.size() * 2)
    throw UsageError("collect_grad: network was applied frozen or layout mismatch");
  for (std::size_t i = 0; i < slices.size(); ++i) {
    const Mat& gw = t.grad(net.param_vars[2 * i]);
    const Mat& gb = t.grad(net.param_vars[2 * i + 1]);
    std::copy(gw.d.begin(), gw.d.end(), g.data() + slices[i].w_off);
    std::copy(gb.d.begin(), gb.d.end(), g.data() + slices[i].b_off);
  }
  return g;
}

}  // namespace expo
