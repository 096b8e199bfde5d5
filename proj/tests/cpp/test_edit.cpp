#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "expo/edit.hpp"
#include "expo/errors.hpp"
#include "expo/optim.hpp"
#include "fd_check.hpp"

using namespace expo;

namespace {

// Reference log-density at a GIVEN edit value, reached through atanh instead
// of the sampled pre-squash value: an independent route to the same density.
double ref_logp(double e, double beta, double mu, double sigma) {
  double u = std::atanh(e / beta);
  double z = (u - mu) / sigma;
  double log_gauss = -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * M_PI);
  double jac = std::log(beta) + std::log1p(-std::tanh(u) * std::tanh(u));
  return log_gauss - jac;
}

}  // namespace

TEST_CASE("edit sampling: beta = 0 disables edits") {
  Rng rng(1);
  EditPolicy pol(2, 2, 16, 2, /*beta=*/0.0);
  pol.init(rng);
  std::vector<double> s{0.1, 0.2}, a{0.3, -0.3};
  auto es = pol.sample_edit(s, a, rng);
  CHECK(es.edit[0] == 0.0);
  CHECK(es.edit[1] == 0.0);
  CHECK(es.log_prob == 0.0);
  auto ed = edited_action(a, es.edit);
  CHECK(ed[0] == a[0]);
  CHECK(ed[1] == a[1]);
}

TEST_CASE("edit sampling: degenerate gaussian collapses to the squashed mean") {
  Rng rng(2);
  EditPolicy pol(1, 1, 8, 1, 0.7);
  ParamVector& p = pol.net().params();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = 0.0;
  auto slices = dense_slices(p);
  // output = (mean, logstd): mean 0, logstd very negative (clamped to -10)
  p[slices.back().b_off + 1] = -50.0;
  std::vector<double> s{0.0}, a{0.0};
  for (int i = 0; i < 100; ++i) {
    auto es = pol.sample_edit(s, a, rng);
    CHECK(std::fabs(es.edit[0]) < 1e-3);
  }
  std::vector<double> mean, logstd;
  pol.stats(s, a, mean, logstd);
  CHECK(logstd[0] == -10.0);  // clamp engaged
}

TEST_CASE("edit sampling: infinity-norm never exceeds beta") {
  Rng rng(3);
  int checked = 0;
  for (int trial = 0; trial < 10; ++trial) {
    double beta = trial % 2 == 0 ? 0.7 : 0.05;
    EditPolicy pol(3, 2, 16, 2, beta);
    pol.init(rng);
    for (std::size_t i = 0; i < pol.net().params().size(); ++i)
      pol.net().params()[i] *= 20.0;  // push tanh toward saturation
    std::vector<double> s(3), a(2);
    for (int i = 0; i < 10000; ++i) {
      for (double& v : s) v = rng.normal();
      for (double& v : a) v = rng.uniform(-1, 1);
      auto es = pol.sample_edit(s, a, rng);
      for (double e : es.edit) {
        CHECK(std::fabs(e) <= beta);
        ++checked;
      }
      auto ed = edited_action(a, es.edit);
      for (std::size_t j = 0; j < ed.size(); ++j) {
        CHECK(ed[j] >= -1.0);
        CHECK(ed[j] <= 1.0);
        // (a + edit) - a re-rounds, so allow one ulp of slack here; the raw
        // edit magnitude above is still checked exactly.
        CHECK(std::fabs(ed[j] - a[j]) <= beta * (1.0 + 1e-15) + 1e-15);
      }
    }
  }
  CHECK(checked == 200000);
}

TEST_CASE("edit log-density: normalizes to one and matches the atanh route") {
  Rng rng(4);
  EditPolicy pol(1, 1, 8, 1, 0.7);
  pol.init(rng);
  std::vector<double> s{0.4}, a{-0.2};
  std::vector<double> mean, logstd;
  pol.stats(s, a, mean, logstd);
  double mu = mean[0], sigma = std::exp(logstd[0]);

  // consistency: the sampler's own log_prob equals the independent formula
  for (int i = 0; i < 50; ++i) {
    auto es = pol.sample_edit(s, a, rng);
    CHECK(es.log_prob == doctest::Approx(ref_logp(es.edit[0], 0.7, mu, sigma)).epsilon(1e-8));
  }

  // normalization: trapezoid quadrature of exp(logp) over the open support
  const int n = 40001;
  const double lo = -0.7 + 1e-9, hi = 0.7 - 1e-9;
  double h = (hi - lo) / (n - 1);
  double integral = 0.0;
  for (int i = 0; i < n; ++i) {
    double e = lo + h * i;
    double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    integral += w * std::exp(ref_logp(e, 0.7, mu, sigma));
  }
  integral *= h;
  CHECK(std::fabs(integral - 1.0) < 1e-3);
}

TEST_CASE("edit loss: constant critic and zero temperature give zero gradient") {
  Rng rng(5);
  EditPolicy pol(2, 1, 8, 2, 0.7);
  pol.init(rng);
  Mat states(4, 2), bases(4, 1);
  rng.normal_fill(states.d);

  auto const_q = [](Tape& t, Var edited) {
    return t.add_scalar(t.scale(t.rowsum(edited), 0.0), 1.0);
  };
  Tape tape;
  TapedNet taped;
  Rng r(77);
  Var loss = pol.edit_loss(tape, taped, states, bases, const_q, /*alpha=*/0.0, r);
  CHECK(tape.scalar(loss) == doctest::Approx(-1.0));
  tape.backward(loss);
  ParamVector g = collect_grad(tape, taped, pol.net().params());
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == 0.0);
}

TEST_CASE("edit loss: gradient matches finite differences under common random numbers") {
  for (std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
    Rng rng(seed);
    EditPolicy pol(2, 1, 6, 1, 0.7, true, /*dropout=*/seed == 2 ? 0.25 : 0.0);
    pol.init(rng);
    Mat states(5, 2), bases(5, 1);
    rng.normal_fill(states.d);
    // bases at 0 so the [-1,1] clip on edited actions stays inactive (the
    // clip kink would break the finite-difference comparison)
    auto quad_q = [](Tape& t, Var edited) {
      return t.scale(t.rowsum(t.square(t.add_scalar(edited, -0.5))), -1.0);
    };
    const double alpha = 0.3;
    auto loss_value = [&]() {
      Tape t;
      TapedNet tn;
      Rng r(900 + seed);
      return t.scalar(pol.edit_loss(t, tn, states, bases, quad_q, alpha, r));
    };
    Tape tape;
    TapedNet taped;
    Rng r(900 + seed);
    Var loss = pol.edit_loss(tape, taped, states, bases, quad_q, alpha, r);
    CHECK(tape.scalar(loss) == doctest::Approx(loss_value()).epsilon(1e-12));
    tape.backward(loss);
    ParamVector g = collect_grad(tape, taped, pol.net().params());
    auto rep = expo::test::fd_compare(pol.net().params(), loss_value, g);
    CHECK(rep.max_rel_err < 1e-3);
  }
}

TEST_CASE("edit loss: quadratic critic drives the mean edit to the clamped maximizer") {
  // Q = -(a + e - 0.5)^2 with a = 0 and beta = 0.7: maximizer e* = +0.5.
  Rng rng(6);
  EditPolicy pol(1, 1, 32, 2, 0.7);
  pol.init(rng);
  AdamState opt(pol.net().params().size(), 3e-3);
  Mat states(16, 1), bases(16, 1);
  auto quad_q = [](Tape& t, Var edited) {
    return t.scale(t.rowsum(t.square(t.add_scalar(edited, -0.5))), -1.0);
  };
  for (int step = 0; step < 2500; ++step) {
    Tape tape;
    TapedNet taped;
    Var loss = pol.edit_loss(tape, taped, states, bases, quad_q, /*alpha=*/0.0, rng);
    tape.backward(loss);
    ParamVector g = collect_grad(tape, taped, pol.net().params());
    adam_step(opt, pol.net().params(), g);
  }
  std::vector<double> s{0.0}, a{0.0};
  double mean_edit = 0.0;
  const int n = 400;
  for (int i = 0; i < n; ++i) mean_edit += pol.sample_edit(s, a, rng).edit[0];
  mean_edit /= n;
  CHECK(std::fabs(mean_edit - 0.5) < 0.05);
}

TEST_CASE("edit loss: locality - the value gradient shrinks with beta") {
  std::vector<double> norms;
  for (double beta : {0.7, 0.05, 0.005}) {
    Rng rng(8);  // identical nets and draws across betas
    EditPolicy pol(2, 2, 8, 1, beta);
    pol.init(rng);
    Mat states(6, 2), bases(6, 2);
    rng.normal_fill(states.d);
    auto quad_q = [](Tape& t, Var edited) {
      return t.scale(t.rowsum(t.square(t.add_scalar(edited, -0.5))), -1.0);
    };
    Tape tape;
    TapedNet taped;
    Rng r(55);
    Var loss = pol.edit_loss(tape, taped, states, bases, quad_q, /*alpha=*/0.0, r);
    tape.backward(loss);
    ParamVector g = collect_grad(tape, taped, pol.net().params());
    double n2 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) n2 += g[i] * g[i];
    norms.push_back(std::sqrt(n2));
  }
  CHECK(norms[1] < norms[0]);
  CHECK(norms[2] < norms[1]);
}

TEST_CASE("edit loss: empty batch and disabled edits are usage errors") {
  Rng rng(9);
  EditPolicy pol(1, 1, 4, 1, 0.5);
  pol.init(rng);
  auto q = [](Tape& t, Var e) { return t.rowsum(e); };
  Tape tape;
  TapedNet taped;
  Mat empty_s(0, 1), empty_a(0, 1);
  CHECK_THROWS_AS(pol.edit_loss(tape, taped, empty_s, empty_a, q, 0.0, rng), UsageError);
  EditPolicy off(1, 1, 4, 1, 0.0);
  Mat s1(1, 1), a1(1, 1);
  CHECK_THROWS_AS(off.edit_loss(tape, taped, s1, a1, q, 0.0, rng), UsageError);
}

TEST_CASE("alpha tuning: fixed point and gradient signs") {
  Rng rng(10);
  const double alr = 1e-2;
  // action_dim 2 -> target entropy -2; fixed point at mean_logp = +2
  {
    EditPolicy pol(1, 2, 4, 1, 0.5, true, 0.0, alr);
    pol.init(rng);
    double before = pol.alpha();
    CHECK(before == doctest::Approx(1.0));
    double after = pol.alpha_update(2.0);
    CHECK(after == doctest::Approx(before).epsilon(1e-12));
  }
  {
    EditPolicy pol(1, 2, 4, 1, 0.5, true, 0.0, alr);
    pol.init(rng);
    double after = pol.alpha_update(50.0);  // far too deterministic
    CHECK(after > 1.0);
    for (int i = 0; i < 200; ++i) after = pol.alpha_update(50.0);
    CHECK(after > 1.2);
  }
  {
    EditPolicy pol(1, 2, 4, 1, 0.5, true, 0.0, alr);
    pol.init(rng);
    double after = pol.alpha_update(-50.0);  // far too stochastic
    CHECK(after < 1.0);
    for (int i = 0; i < 200; ++i) after = pol.alpha_update(-50.0);
    CHECK(after < 0.8);
  }
  EditPolicy pol(1, 2, 4, 1, 0.5);
  CHECK_THROWS_AS(pol.set_alpha(0.0), ConfigError);
  pol.set_alpha(0.25);
  CHECK(pol.alpha() == doctest::Approx(0.25));
}

TEST_CASE("state-only actor mode spans the action box") {
  // condition_on_action=false with beta=1 behaves as a tanh-Gaussian actor.
  Rng rng(11);
  EditPolicy actor(3, 2, 16, 2, 1.0, /*condition_on_action=*/false);
  actor.init(rng);
  for (std::size_t i = 0; i < actor.net().params().size(); ++i)
    actor.net().params()[i] *= 30.0;
  std::vector<double> s(3);
  std::vector<double> zero_base(2, 0.0);
  double lo = 1e9, hi = -1e9;
  for (int i = 0; i < 2000; ++i) {
    for (double& v : s) v = rng.normal();  // vary the state so the mean flips sign
    auto es = actor.sample_edit(s, zero_base, rng);
    auto act = edited_action(zero_base, es.edit);
    for (double v : act) {
      CHECK(v >= -1.0);
      CHECK(v <= 1.0);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  CHECK(lo < -0.9);
  CHECK(hi > 0.9);
}
