#include "expo/tape.hpp"

#include <cassert>
#include <cmath>

#include "expo/errors.hpp"

namespace expo {

int Tape::push(Mat v, bool requires_grad) {
  Node n;
  n.grad = Mat(v.rows, v.cols);
  n.val = std::move(v);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

Var Tape::constant(Mat v) { return {push(std::move(v), false)}; }
Var Tape::leaf(Mat v) { return {push(std::move(v), true)}; }

Var Tape::linear(Var x, Var w, Var b) {
  const Mat& xv = v(x.id);
  const Mat& wv = v(w.id);
  const Mat& bv = v(b.id);
  if (xv.cols != wv.rows || bv.rows != 1 || bv.cols != wv.cols)
    throw ConfigError("linear: dimension mismatch");
  Mat out(xv.rows, wv.cols);
  for (int r = 0; r < out.rows; ++r)
    for (int c = 0; c < out.cols; ++c) out.at(r, c) = bv.d[c];
  gemm_acc(xv, wv, out);
  bool need = rg(x) || rg(w) || rg(b);
  int id = push(std::move(out), need);
  if (need) {
    int xi = x.id, wi = w.id, bi = b.id;
    nodes_[id].back = [id, xi, wi, bi](Tape& t) {
      const Mat& gy = t.g(id);
      if (t.nodes_[xi].requires_grad) gemm_nt_acc(gy, t.v(wi), t.g(xi));
      if (t.nodes_[wi].requires_grad) gemm_tn_acc(t.v(xi), gy, t.g(wi));
      if (t.nodes_[bi].requires_grad) {
        Mat& gb = t.g(bi);
        for (int r = 0; r < gy.rows; ++r)
          for (int c = 0; c < gy.cols; ++c) gb.d[c] += gy.at(r, c);
      }
    };
  }
  return {id};
}

Var Tape::matmul(Var x, Var w) {
  const Mat& xv = v(x.id);
  const Mat& wv = v(w.id);
  if (xv.cols != wv.rows) throw ConfigError("matmul: dimension mismatch");
  Mat out(xv.rows, wv.cols);
  gemm_acc(xv, wv, out);
  bool need = rg(x) || rg(w);
  int id = push(std::move(out), need);
  if (need) {
    int xi = x.id, wi = w.id;
    nodes_[id].back = [id, xi, wi](Tape& t) {
      const Mat& gy = t.g(id);
      if (t.nodes_[xi].requires_grad) gemm_nt_acc(gy, t.v(wi), t.g(xi));
      if (t.nodes_[wi].requires_grad) gemm_tn_acc(t.v(xi), gy, t.g(wi));
    };
  }
  return {id};
}

namespace {
template <class F>
Mat map(const Mat& x, F f) {
  Mat y(x.rows, x.cols);
  for (std::size_t i = 0; i < x.size(); ++i) y.d[i] = f(x.d[i]);
  return y;
}
}  // namespace

Var Tape::relu(Var x) {
  int id = push(map(v(x.id), [](double a) { return a > 0.0 ? a : 0.0; }), rg(x));
  if (rg(x)) {
    int xi = x.id;
    nodes_[id].back = [id, xi](Tape& t) {
      const Mat& gy = t.g(id);
      const Mat& xv = t.v(xi);
      Mat& gx = t.g(xi);
      for (std::size_t i = 0; i < gy.size(); ++i)
        if (xv.d[i] > 0.0) gx.d[i] += gy.d[i];
    };
  }
  return {id};
}

Var Tape::tanh_(Var x) {
  int id = push(map(v(x.id), [](double a) { return std::tanh(a); }), rg(x));
  if (rg(x)) {
    int xi = x.id;
    nodes_[id].back = [id, xi](Tape& t) {
      const Mat& gy = t.g(id);
      const Mat& yv = t.v(id);
      Mat& gx = t.g(xi);
      for (std::size_t i = 0; i < gy.size(); ++i) gx.d[i] += gy.d[i] * (1.0 - yv.d[i] * yv.d[i]);
    };
  }
  return {id};
}

Var Tape::exp_(Var x) {
  int id = push(map(v(x.id), [](double a) { return std::exp(a); }), rg(x));
  if (rg(x)) {
    int xi = x.id;
    nodes_[id].back = [id, xi](Tape& t) {
      const Mat& gy = t.g(id);
      const Mat& yv = t.v(id);
      Mat& gx = t.g(xi);
      for (std::size_t i = 0; i < gy.size(); ++i) gx.d[i] += gy.d[i] * yv.d[i];
    };
  }
  return {id};
}

Var Tape::log_(Var x) {
  int id = push(map(v(x.id), [](double a) { return std::log(a); }), rg(x));
  if (rg(x)) {
    int xi = x.id;
    nodes_[id].back = [id, xi](Tape& t) {
      const Mat& gy = t.g(id);
      const Mat& xv = t.v(xi);
      Mat& gx = t.g(xi);
      for (std::size_t i = 0; i < gy.size(); ++i) gx.d[i] += gy.d[i] / xv.d[i];
    };
  }
  return {id};
}

Var Tape::square(Var x) {
  int id = push(map(v(x.id), [](double a) { return a * a; }), rg(x));
  if (rg(x)) {
    int xi = x.id;
    nodes_[id].back = [id, xi](Tape& t) {
      const Mat& gy = t.g(id);
      const Mat& xv = t.v(xi);
      Mat& gx = t.g(xi);
      for (std::size_t i = 0; i < gy.size(); ++i) gx.d[i] += 2.0 * gy.d[i] * xv.d[i];
    };
  }
  return {id};
}

Var Tape::softplus(Var x) {
  auto sp = [](double a) { return a > 0.0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a)); };
  int id = push(map(v(x.id), sp), rg(x));
  if (rg(x)) {
    int xi = x.id;
    nodes_[id].back = [id, xi](Tape& t) {
      const Mat& gy = t.g(id);
      const Mat& xv = t.v(xi);
      Mat& gx = t.g(xi);
      for (std::size_t i = 0; i < gy.size(); ++i) gx.d[i] += gy.d[i] / (1.0 + std::exp(-xv.d[i]));
    };
  }
  return {id};
}

Var Tape::clamp(Var x, double lo, double hi) {
  int id = push(map(v(x.id), [lo, hi](double a) { return a < lo ? lo : (a > hi ? hi : a); }), rg(x));
  if (rg(x)) {
    int xi = x.id;
    nodes_[id].back = [id, xi, lo, hi](Tape& t) {
      const Mat& gy = t.g(id);
      const Mat& xv = t.v(xi);
      Mat& gx = t.g(xi);
      for (std::size_t i = 0; i < gy.size(); ++i)
        if (xv.d[i] >= lo && xv.d[i] <= hi) gx.d[i] += gy.d[i];
    };
  }
  return {id};
}

Var Tape::add(Var a, Var b) {
  const Mat& av = v(a.id);
  const Mat& bv = v(b.id);
  if (!av.same_shape(bv)) throw ConfigError("add: shape mismatch");
  Mat out(av.rows, av.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out.d[i] = av.d[i] + bv.d[i];
  bool need = rg(a) || rg(b);
  int id = push(std::move(out), need);
  if (need) {
    int ai = a.id, bi = b.id;
    nodes_[id].back = [id, ai, bi](Tape& t) {
      const Mat& gy = t.g(id);
      if (t.nodes_[ai].requires_grad) {
        Mat& ga = t.g(ai);
        for (std::size_t i = 0; i < gy.size(); ++i) ga.d[i] += gy.d[i];
      }
      if (t.nodes_[bi].requires_grad) {
        Mat& gb = t.g(bi);
        for (std::size_t i = 0; i < gy.size(); ++i) gb.d[i] += gy.d[i];
      }
    };
  }
  return {id};
}

Var Tape::sub(Var a, Var b) {
  const Mat& av = v(a.id);
  const Mat& bv = v(b.id);
  if (!av.same_shape(bv)) throw ConfigError("sub: shape mismatch");
  Mat out(av.rows, av.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out.d[i] = av.d[i] - bv.d[i];
  bool need = rg(a) || rg(b);
  int id = push(std::move(out), need);
  if (need) {
    int ai = a.id, bi = b.id;
    nodes_[id].back = [id, ai, bi](Tape& t) {
      const Mat& gy = t.g(id);
      if (t.nodes_[ai].requires_grad) {
        Mat& ga = t.g(ai);
        for (std::size_t i = 0; i < gy.size(); ++i) ga.d[i] += gy.d[i];
      }
      if (t.nodes_[bi].requires_grad) {
        Mat& gb = t.g(bi);
        for (std::size_t i = 0; i < gy.size(); ++i) gb.d[i] -= gy.d[i];
      }
    };
  }
  return {id};
}

Var Tape::mul(Var a, Var b) {
  const Mat& av = v(a.id);
  const Mat& bv = v(b.id);
  if (!av.same_shape(bv)) throw ConfigError("mul: shape mismatch");
  Mat out(av.rows, av.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out.d[i] = av.d[i] * bv.d[i];
  bool need = rg(a) || rg(b);
  int id = push(std::move(out), need);
  if (need) {
    int ai = a.id, bi = b.id;
    nodes_[id].back = [id, ai, bi](Tape& t) {
      const Mat& gy = t.g(id);
      const Mat& av2 = t.v(ai);
      const Mat& bv2 = t.v(bi);
      if (t.nodes_[ai].requires_grad) {
        Mat& ga = t.g(ai);
        for (std::size_t i = 0; i < gy.size(); ++i) ga.d[i] += gy.d[i] * bv2.d[i];
      }
      if (t.nodes_[bi].requires_grad) {
        Mat& gb = t.g(bi);
        for (std::size_t i = 0; i < gy.size(); ++i) gb.d[i] += gy.d[i] * av2.d[i];
      }
    };
  }
  return {id};
}

Var Tape::scale(Var x, double c) {
  int id = push(map(v(x.id), [c](double a) { return c * a; }), rg(x));
  if (rg(x)) {
    int xi = x.id;
    nodes_[id].back = [id, xi, c](Tape& t) {
      const Mat& gy = t.g(id);
      Mat& gx = t.g(xi);
      for (std::size_t i = 0; i < gy.size(); ++i) gx.d[i] += c * gy.d[i];
    };
  }
  return {id};
}

Var Tape::add_scalar(Var x, double c) {
  int id = push(map(v(x.id), [c](double a) { return a + c; }), rg(x));
  if (rg(x)) {
    int xi = x.id;
    nodes_[id].back = [id, xi](Tape& t) {
      const Mat& gy = t.g(id);
      Mat& gx = t.g(xi);
      for (std::size_t i = 0; i < gy.size(); ++i) gx.d[i] += gy.d[i];
    };
  }
  return {id};
}

Var Tape::concat_cols(std::span<const Var> xs) {
  if (xs.empty()) throw UsageError("concat_cols: empty input");
  int rows = v(xs[0].id).rows;
  int cols = 0;
  bool need = false;
  for (Var x : xs) {
    if (v(x.id).rows != rows) throw ConfigError("concat_cols: row mismatch");
    cols += v(x.id).cols;
    need = need || rg(x);
  }
  Mat out(rows, cols);
  int c0 = 0;
  for (Var x : xs) {
    const Mat& xv = v(x.id);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < xv.cols; ++c) out.at(r, c0 + c) = xv.at(r, c);
    c0 += xv.cols;
  }
  int id = push(std::move(out), need);
  if (need) {
    std::vector<int> ids;
    for (Var x : xs) ids.push_back(x.id);
    nodes_[id].back = [id, ids](Tape& t) {
      const Mat& gy = t.g(id);
      int c0 = 0;
      for (int xi : ids) {
        Mat& gx = t.g(xi);
        if (t.nodes_[xi].requires_grad)
          for (int r = 0; r < gy.rows; ++r)
            for (int c = 0; c < gx.cols; ++c) gx.at(r, c) += gy.at(r, c0 + c);
        c0 += t.v(xi).cols;
      }
    };
  }
  return {id};
}

Var Tape::slice_cols(Var x, int c0, int c1) {
  const Mat& xv = v(x.id);
  if (c0 < 0 || c1 > xv.cols || c0 >= c1) throw ConfigError("slice_cols: bad range");
  Mat out(xv.rows, c1 - c0);
  for (int r = 0; r < xv.rows; ++r)
    for (int c = c0; c < c1; ++c) out.at(r, c - c0) = xv.at(r, c);
  int id = push(std::move(out), rg(x));
  if (rg(x)) {
    int xi = x.id;
    nodes_[id].back = [id, xi, c0](Tape& t) {
      const Mat& gy = t.g(id);
      Mat& gx = t.g(xi);
      for (int r = 0; r < gy.rows; ++r)
        for (int c = 0; c < gy.cols; ++c) gx.at(r, c0 + c) += gy.at(r, c);
    };
  }
  return {id};
}

Var Tape::rowsum(Var x) {
  const Mat& xv = v(x.id);
  Mat out(xv.rows, 1);
  for (int r = 0; r < xv.rows; ++r) {
    double s = 0.0;
    for (int c = 0; c < xv.cols; ++c) s += xv.at(r, c);
    out.d[r] = s;
  }
  int id = push(std::move(out), rg(x));
  if (rg(x)) {
    int xi = x.id;
    nodes_[id].back = [id, xi](Tape& t) {
      const Mat& gy = t.g(id);
      Mat& gx = t.g(xi);
      for (int r = 0; r < gx.rows; ++r)
        for (int c = 0; c < gx.cols; ++c) gx.at(r, c) += gy.d[r];
    };
  }
  return {id};
}

Var Tape::sum_all(Var x) {
  const Mat& xv = v(x.id);
  double s = 0.0;
  for (double a : xv.d) s += a;
  Mat out(1, 1);
  out.d[0] = s;
  int id = push(std::move(out), rg(x));
  if (rg(x)) {
    int xi = x.id;
    nodes_[id].back = [id, xi](Tape& t) {
      double gy = t.g(id).d[0];
      Mat& gx = t.g(xi);
      for (std::size_t i = 0; i < gx.size(); ++i) gx.d[i] += gy;
    };
  }
  return {id};
}

Var Tape::mean_all(Var x) {
  const Mat& xv = v(x.id);
  if (xv.size() == 0) throw UsageError("mean_all: empty matrix");
  double s = 0.0;
  for (double a : xv.d) s += a;
  double inv = 1.0 / static_cast<double>(xv.size());
  Mat out(1, 1);
  out.d[0] = s * inv;
  int id = push(std::move(out), rg(x));
  if (rg(x)) {
    int xi = x.id;
    nodes_[id].back = [id, xi, inv](Tape& t) {
      double gy = t.g(id).d[0] * inv;
      Mat& gx = t.g(xi);
      for (std::size_t i = 0; i < gx.size(); ++i) gx.d[i] += gy;
    };
  }
  return {id};
}

void Tape::backward(Var loss) {
  const Mat& lv = v(loss.id);
  if (lv.rows != 1 || lv.cols != 1) throw UsageError("backward: loss must be scalar");
  nodes_[loss.id].grad.d[0] = 1.0;
  for (int i = loss.id; i >= 0; --i)
    if (nodes_[i].back) nodes_[i].back(*this);
}

}  // namespace expo
