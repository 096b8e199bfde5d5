#pragma once

#include <functional>
#include <span>
#include <vector>

#include "expo/mat.hpp"

namespace expo {

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode tape over Mat values. Nodes are recorded in topological order
// during the forward build; backward() walks them in reverse. Constants carry
// no gradient; leaves do. The tape owns all values and gradients for one loss
// evaluation and is discarded afterwards.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Mat v);
  Var leaf(Mat v);

  const Mat& val(Var x) const { return nodes_[x.id].val; }
  const Mat& grad(Var x) const { return nodes_[x.id].grad; }

  // y = x*W + 1*b^T, W: (in,out), b: (1,out)
  Var linear(Var x, Var w, Var b);
  Var matmul(Var x, Var w);

  Var relu(Var x);
  Var tanh_(Var x);
  Var exp_(Var x);
  Var log_(Var x);
  Var square(Var x);
  Var softplus(Var x);
  Var clamp(Var x, double lo, double hi);  // zero gradient outside [lo, hi]

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var x, double c);
  Var add_scalar(Var x, double c);

  Var concat_cols(std::span<const Var> xs);
  Var slice_cols(Var x, int c0, int c1);  // [c0, c1)
  Var rowsum(Var x);                      // (B,d) -> (B,1)
  Var sum_all(Var x);                     // -> (1,1)
  Var mean_all(Var x);                    // -> (1,1)

  double scalar(Var x) const { return nodes_[x.id].val.d[0]; }

  void backward(Var loss);

 private:
  struct Node {
    Mat val;
    Mat grad;
    bool requires_grad = false;
    std::function<void(Tape&)> back;  // null for constants and leaves
  };

  int push(Mat v, bool requires_grad);
  bool rg(Var x) const { return nodes_[x.id].requires_grad; }
  Mat& g(int id) { return nodes_[id].grad; }
  const Mat& v(int id) const { return nodes_[id].val; }

  std::vector<Node> nodes_;
};

}  // namespace expo
