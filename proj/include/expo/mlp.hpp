#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "expo/param.hpp"
#include "expo/rng.hpp"
#include "expo/tape.hpp"

namespace expo {

enum class Act { relu, tanh, identity };

// A network applied to the tape: output plus the parameter leaves
// (W0, b0, W1, b1, ...) in layout order. param_vars is empty when the
// network was applied frozen.
struct TapedNet {
  Var out;
  std::vector<Var> param_vars;
};

// Fully connected network over a dense-chain ParamVector. The activation
// list has one entry per layer, applied after that layer's affine map.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<std::uint32_t> widths, std::vector<Act> acts);

  // in -> hidden x layers (relu) -> out (identity)
  static Mlp make(std::uint32_t in, std::uint32_t hidden, int hidden_layers, std::uint32_t out);

  void init(Rng& rng, bool small_final = false);

  std::uint32_t in_dim() const { return widths_.front(); }
  std::uint32_t out_dim() const { return widths_.back(); }
  const std::vector<std::uint32_t>& widths() const { return widths_; }
  const std::vector<Act>& activations() const { return acts_; }

  ParamVector& params() { return params_; }
  const ParamVector& params() const { return params_; }

  Mat forward_batch(const Mat& x) const;
  std::vector<double> forward(std::span<const double> in) const;

  TapedNet apply(Tape& t, Var x, bool train_params = true) const;

 private:
  std::vector<std::uint32_t> widths_;
  std::vector<Act> acts_;
  ParamVector params_;
};

// MLP with residual blocks: input projection, `blocks` times
// h <- h + W2*relu(W1*h), then a linear head. Parameters live in one
// dense-chain layout so checkpoints and Adam treat it like any Mlp.
class ResidualMlp {
 public:
  ResidualMlp() = default;
  ResidualMlp(std::uint32_t in, std::uint32_t hidden, int blocks, std::uint32_t out);

  void init(Rng& rng, bool small_final = false);

  std::uint32_t in_dim() const { return in_; }
  std::uint32_t out_dim() const { return out_; }
  int blocks() const { return blocks_; }

  ParamVector& params() { return params_; }
  const ParamVector& params() const { return params_; }

  Mat forward_batch(const Mat& x) const;
  std::vector<double> forward(std::span<const double> in) const;

  TapedNet apply(Tape& t, Var x, bool train_params = true) const;

 private:
  std::uint32_t in_ = 0, hidden_ = 0, out_ = 0;
  int blocks_ = 0;
  ParamVector params_;
};

// Copies the gradients of a taped network's parameter leaves into a flat
// vector with the same layout as `like`.
ParamVector collect_grad(const Tape& t, const TapedNet& net, const ParamVector& like);

// Fan-in-scaled uniform init for a dense-chain parameter vector.
void init_dense_chain(ParamVector& p, Rng& rng, bool small_final, double small_scale = 1e-2);

}  // namespace expo
