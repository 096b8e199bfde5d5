#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "expo/demos.hpp"
#include "expo/env.hpp"
#include "expo/errors.hpp"
#include "expo/normalizer.hpp"

using namespace expo;

namespace {

struct EpisodeTrace {
  std::vector<std::vector<double>> states;
  std::vector<double> rewards;
  double total = 0.0;
  double last = 0.0;
  int steps = 0;
  bool terminated_early = false;
};

EpisodeTrace run_demo_episode(Env& env, Demonstrator& demo, Rng& rng) {
  EpisodeTrace tr;
  std::vector<double> s = env.reset(rng);
  demo.begin_episode(s);
  tr.states.push_back(s);
  bool done = false;
  while (!done) {
    auto a = demo.action(s, rng);
    StepResult sr = env.step(a);
    tr.states.push_back(sr.state);
    tr.rewards.push_back(sr.reward);
    tr.total += sr.reward;
    tr.last = sr.reward;
    ++tr.steps;
    done = sr.done;
    tr.terminated_early = done && tr.steps < env.horizon();
    s = sr.state;
  }
  return tr;
}

}  // namespace

TEST_CASE("maze layout: start and goal cells are free and distinct") {
  CHECK_FALSE(PointMaze::wall_cell(1, 1));  // start cell
  CHECK_FALSE(PointMaze::wall_cell(6, 6));  // goal cell
  CHECK(PointMaze::wall_at(0.5, 0.5));      // border ring is solid
  CHECK(PointMaze::wall_at(7.5, 7.5));
  // the goal disc does not overlap the start jitter square
  double dist = std::hypot(PointMaze::kGoalX - PointMaze::kStartX,
                           PointMaze::kGoalY - PointMaze::kStartY);
  CHECK(dist > PointMaze::kGoalRadius + 2.0 * PointMaze::kStartJitter);
}

TEST_CASE("maze reset: always in free space, deterministic per seed") {
  PointMaze env;
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    auto s = env.reset(rng);
    CHECK_FALSE(PointMaze::wall_at(s[0], s[1]));
    CHECK(std::fabs(s[0] - PointMaze::kStartX) <= PointMaze::kStartJitter);
    CHECK(std::fabs(s[1] - PointMaze::kStartY) <= PointMaze::kStartJitter);
    CHECK(s[2] == 0.0);
    CHECK(s[3] == 0.0);
  }
  Rng r1(7), r2(7);
  PointMaze e1, e2;
  CHECK(e1.reset(r1) == e2.reset(r2));
}

TEST_CASE("maze step: zero action from rest is a fixed point") {
  PointMaze env;
  Rng rng(2);
  auto s0 = env.reset(rng);
  StepResult sr = env.step(std::vector<double>{0.0, 0.0});
  CHECK(sr.state[0] == s0[0]);
  CHECK(sr.state[1] == s0[1]);
  CHECK(sr.state[2] == 0.0);
  CHECK(sr.state[3] == 0.0);
  CHECK(sr.reward == 0.0);
  CHECK_FALSE(sr.done);
}

TEST_CASE("maze step: wall contact zeroes the normal velocity, keeps the tangential") {
  PointMaze env;
  Rng rng(3);
  env.reset(rng);
  // drive left into the x = 1 wall face; once blocked the x coordinate and
  // x-velocity freeze while the y motion continues
  StepResult sr;
  for (int i = 0; i < 10; ++i) sr = env.step(std::vector<double>{-1.0, 0.0});
  double x_pinned = sr.state[0];
  CHECK(x_pinned >= 1.0);
  CHECK(x_pinned < 1.5);
  CHECK(sr.state[2] == 0.0);  // normal component zeroed
  StepResult sr2 = env.step(std::vector<double>{-1.0, 0.4});
  CHECK(sr2.state[0] == x_pinned);   // still blocked in x
  CHECK(sr2.state[2] == 0.0);
  CHECK(sr2.state[1] > sr.state[1]);  // tangential motion preserved
  CHECK(sr2.state[3] > 0.0);
}

TEST_CASE("maze step: diagonal corner contact freezes both axes") {
  PointMaze env;
  Rng rng(4);
  env.reset(rng);
  StepResult sr;
  for (int i = 0; i < 20; ++i) sr = env.step(std::vector<double>{-1.0, -1.0});
  StepResult sr2 = env.step(std::vector<double>{-1.0, -1.0});
  CHECK(sr2.state[0] == sr.state[0]);
  CHECK(sr2.state[1] == sr.state[1]);
  CHECK(sr2.state[2] == 0.0);
  CHECK(sr2.state[3] == 0.0);
}

TEST_CASE("maze physics: speed cap, box actions, free-space invariant, reward in {0,1}") {
  PointMaze env;
  Rng rng(5);
  for (int ep = 0; ep < 3; ++ep) {
    auto s = env.reset(rng);
    for (int t = 0; t < PointMaze::kHorizon; ++t) {
      // out-of-range actions must be clipped internally
      std::vector<double> a{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
      StepResult sr = env.step(a);
      double speed = std::hypot(sr.state[2], sr.state[3]);
      CHECK(speed <= PointMaze::kMaxSpeed + 1e-12);
      CHECK_FALSE(PointMaze::wall_at(sr.state[0], sr.state[1]));
      CHECK((sr.reward == 0.0 || sr.reward == 1.0));
      if (sr.done) break;
      s = sr.state;
    }
  }
  (void)env;
}

TEST_CASE("maze episodes: terminate on first success with unit return") {
  PointMaze env;
  Demonstrator demo(env, 0.0);
  Rng rng(6);
  for (int ep = 0; ep < 20; ++ep) {
    EpisodeTrace tr = run_demo_episode(env, demo, rng);
    REQUIRE(tr.total == 1.0);           // exactly one rewarded step
    CHECK(tr.last == 1.0);              // and it is the final one
    CHECK(tr.terminated_early);         // success ends the episode
    CHECK(tr.steps < PointMaze::kHorizon);
    auto& fin = tr.states.back();
    CHECK(std::hypot(fin[0] - PointMaze::kGoalX, fin[1] - PointMaze::kGoalY) <=
          PointMaze::kGoalRadius);
    CHECK(env.episode_score(tr.total) == 1.0);
  }
}

TEST_CASE("maze trajectories: (seed, action sequence) determinism") {
  auto rollout = [](std::uint64_t seed) {
    PointMaze env;
    Rng rng(seed);
    auto s = env.reset(rng);
    std::vector<double> flat(s.begin(), s.end());
    Rng act_rng(seed + 1);
    for (int t = 0; t < 50; ++t) {
      std::vector<double> a{act_rng.uniform(-1, 1), act_rng.uniform(-1, 1)};
      StepResult sr = env.step(a);
      flat.insert(flat.end(), sr.state.begin(), sr.state.end());
      if (sr.done) break;
    }
    return flat;
  };
  CHECK(rollout(9) == rollout(9));
  CHECK(rollout(9) != rollout(10));
}

TEST_CASE("box reset: fixed effector start, object uniform in the tray") {
  ReachBox env;
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    auto s = env.reset(rng);
    CHECK(s[0] == 0.0);
    CHECK(s[1] == 0.0);
    CHECK(s[2] == ReachBox::kStartZ);
    CHECK(std::fabs(s[3]) <= ReachBox::kTrayHalfExtent);
    CHECK(std::fabs(s[4]) <= ReachBox::kTrayHalfExtent);
    CHECK(s[5] == 0.0);
    CHECK(s[6] == 0.0);
    // effector starts outside the latch radius of any tray position
    CHECK(std::hypot(s[3], s[4], s[2]) > ReachBox::kLatchRadius);
  }
}

TEST_CASE("box step: zero action moves nothing; bounds hold under random play") {
  ReachBox env;
  Rng rng(12);
  auto s0 = env.reset(rng);
  StepResult sr = env.step(std::vector<double>{0.0, 0.0, 0.0});
  CHECK(sr.state == s0);
  for (int t = 0; t < ReachBox::kHorizon - 1; ++t) {
    std::vector<double> a{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
    sr = env.step(a);
    CHECK(std::fabs(sr.state[0]) <= ReachBox::kBoundXY);
    CHECK(std::fabs(sr.state[1]) <= ReachBox::kBoundXY);
    CHECK(sr.state[2] >= 0.0);
    CHECK(sr.state[2] <= ReachBox::kBoundZ);
    CHECK((sr.reward == 0.0 || sr.reward == 1.0));
    CHECK((sr.state[6] == 0.0 || sr.state[6] == 1.0));
  }
  CHECK(sr.done);                 // horizon reached exactly
  CHECK_FALSE(sr.terminal);       // horizon cuts are not terminal
}

TEST_CASE("box latch: sticky, object tracks the effector, lift pays per step") {
  ReachBox env;
  Rng rng(13);
  auto s = env.reset(rng);
  Demonstrator demo(env, 0.0);
  demo.begin_episode(s);
  int first_reward_step = -1;
  int steps = 0;
  double total = 0.0;
  bool latched_seen = false;
  bool done = false;
  while (!done) {
    auto a = demo.action(s, rng);
    StepResult sr = env.step(a);
    ++steps;
    if (latched_seen) {
      CHECK(sr.state[6] == 1.0);  // latch never releases
      CHECK(sr.state[3] == sr.state[0]);
      CHECK(sr.state[4] == sr.state[1]);
      CHECK(sr.state[5] == sr.state[2]);
    }
    if (sr.state[6] == 1.0) latched_seen = true;
    if (sr.reward == 1.0) {
      CHECK(sr.state[6] == 1.0);
      CHECK(sr.state[5] > ReachBox::kLiftThreshold);
      if (first_reward_step < 0) first_reward_step = steps;
    }
    total += sr.reward;
    done = sr.done;
    s = sr.state;
  }
  CHECK(steps == ReachBox::kHorizon);  // no early termination
  REQUIRE(first_reward_step > 0);
  CHECK(first_reward_step <= 6);  // scripted reach-latch-lift is fast
  // reward pays on every step after the lift: return = horizon - lead-in
  CHECK(total == doctest::Approx(ReachBox::kHorizon - first_reward_step + 1));
  CHECK(env.episode_score(total) >= 0.94);
}

TEST_CASE("box latch: approach within the radius engages even when moving away after") {
  ReachBox env;
  Rng rng(14);
  auto s = env.reset(rng);
  // descend straight onto the object, then retreat upward; the latch holds
  Demonstrator demo(env, 0.0);
  demo.begin_episode(s);
  bool done = false;
  int steps = 0;
  while (s[6] == 0.0 && !done) {
    auto a = demo.action(s, rng);
    StepResult sr = env.step(a);
    s = sr.state;
    done = sr.done;
    ++steps;
    REQUIRE(steps < 20);
  }
  REQUIRE(s[6] == 1.0);
  for (int i = 0; i < 5; ++i) {
    StepResult sr = env.step(std::vector<double>{1.0, 0.0, 1.0});
    CHECK(sr.state[6] == 1.0);
    CHECK(sr.state[3] == sr.state[0]);
    s = sr.state;
  }
}

TEST_CASE("env factory: names and rejection") {
  CHECK(std::string(make_env("point_maze")->name()) == "point_maze");
  CHECK(std::string(make_env("reach_box")->name()) == "reach_box");
  CHECK(make_env("point_maze")->state_dim() == 4);
  CHECK(make_env("reach_box")->state_dim() == 7);
  CHECK_THROWS_AS(make_env("cartpole"), ConfigError);
}

TEST_CASE("demonstrator: maze plan reaches the goal cell through free space") {
  PointMaze env;
  Rng rng(15);
  auto s = env.reset(rng);
  Demonstrator demo(env, 0.0);
  demo.begin_episode(s);
  const auto& wps = demo.waypoints();
  REQUIRE(wps.size() >= 2);
  CHECK(wps.front()[0] == doctest::Approx(1.5));
  CHECK(wps.front()[1] == doctest::Approx(1.5));
  CHECK(wps.back()[0] == doctest::Approx(PointMaze::kGoalX));
  CHECK(wps.back()[1] == doctest::Approx(PointMaze::kGoalY));
  for (std::size_t i = 0; i < wps.size(); ++i) {
    CHECK_FALSE(PointMaze::wall_at(wps[i][0], wps[i][1]));
    if (i > 0) {  // consecutive waypoints are 4-adjacent cell centers
      double step = std::fabs(wps[i][0] - wps[i - 1][0]) + std::fabs(wps[i][1] - wps[i - 1][1]);
      CHECK(step == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("demonstrator: high success on both tasks, with and without noise") {
  {
    PointMaze env;
    Demonstrator demo(env, 0.0);
    Rng rng(16);
    int wins = 0;
    for (int ep = 0; ep < 50; ++ep) {
      EpisodeTrace tr = run_demo_episode(env, demo, rng);
      wins += env.episode_success(tr.total, tr.last) ? 1 : 0;
    }
    CHECK(wins == 50);
  }
  {
    PointMaze env;
    Demonstrator demo(env, 0.05);
    Rng rng(17);
    int wins = 0;
    for (int ep = 0; ep < 50; ++ep) {
      EpisodeTrace tr = run_demo_episode(env, demo, rng);
      wins += env.episode_success(tr.total, tr.last) ? 1 : 0;
    }
    CHECK(wins >= 48);
  }
  {
    ReachBox env;
    Demonstrator demo(env, 0.05);
    Rng rng(18);
    double score = 0.0;
    int wins = 0;
    for (int ep = 0; ep < 50; ++ep) {
      EpisodeTrace tr = run_demo_episode(env, demo, rng);
      score += env.episode_score(tr.total);
      wins += env.episode_success(tr.total, tr.last) ? 1 : 0;
    }
    CHECK(score / 50.0 >= 0.9);
    CHECK(wins >= 48);
  }
}

TEST_CASE("demonstrator: zero noise is deterministic per reset seed") {
  PointMaze env;
  Demonstrator demo(env, 0.0);
  auto run = [&](std::uint64_t seed) {
    Rng rng(seed);
    EpisodeTrace tr = run_demo_episode(env, demo, rng);
    return tr.states.back();
  };
  CHECK(run(19) == run(19));
}

TEST_CASE("demonstrator: unknown env and negative noise are rejected") {
  PointMaze env;
  CHECK_THROWS_AS(Demonstrator(env, -0.1), ConfigError);
}

TEST_CASE("generate_demos: filter keeps only successes; counts and flags add up") {
  {
    PointMaze env;
    Demonstrator demo(env, 0.05);
    Rng rng(20);
    auto data = generate_demos(env, demo, 5, rng);
    int terminal_count = 0;
    double reward_sum = 0.0;
    for (const auto& t : data) {
      reward_sum += t.r;
      if (t.done) {
        ++terminal_count;
        CHECK(t.r == 1.0);  // terminate-on-success: terminal step pays
      }
    }
    CHECK(terminal_count == 5);            // one terminal per kept episode
    CHECK(reward_sum == 5.0);              // and no other rewards
    CHECK(data.size() < 5u * PointMaze::kHorizon);
  }
  {
    ReachBox env;
    Demonstrator demo(env, 0.0);
    Rng rng(21);
    auto data = generate_demos(env, demo, 3, rng);
    CHECK(data.size() == 3u * ReachBox::kHorizon);  // full-horizon episodes
    for (const auto& t : data) CHECK_FALSE(t.done);  // horizon cut bootstraps
    // each episode's final transition pays (filter requires it)
    for (std::size_t ep = 0; ep < 3; ++ep)
      CHECK(data[(ep + 1) * ReachBox::kHorizon - 1].r == 1.0);
  }
}

TEST_CASE("generate_demos: deterministic for a fixed seed") {
  PointMaze env;
  Demonstrator demo(env, 0.1);
  Rng r1(22), r2(22);
  auto d1 = generate_demos(env, demo, 3, r1);
  auto d2 = generate_demos(env, demo, 3, r2);
  REQUIRE(d1.size() == d2.size());
  for (std::size_t i = 0; i < d1.size(); ++i) {
    CHECK(d1[i].s == d2[i].s);
    CHECK(d1[i].a == d2[i].a);
    CHECK(d1[i].r == d2[i].r);
    CHECK(d1[i].done == d2[i].done);
  }
}

TEST_CASE("generate_demos: exhausting the attempt budget raises a generation error") {
  PointMaze env;
  // zero-gain follower emits zero actions and never reaches the goal
  Demonstrator stuck(env, 0.0, /*success_filter=*/true, DemoGains{0.0, 0.0, 0.35});
  Rng rng(23);
  CHECK_THROWS_AS(generate_demos(env, stuck, 2, rng), GenerationError);
  CHECK_THROWS_AS(generate_demos(env, stuck, 0, rng), UsageError);
}

TEST_CASE("generate_demos: filter off keeps failures too") {
  PointMaze env;
  Demonstrator stuck(env, 0.0, /*success_filter=*/false, DemoGains{0.0, 0.0, 0.35});
  Rng rng(24);
  auto data = generate_demos(env, stuck, 2, rng);
  CHECK(data.size() == 2u * PointMaze::kHorizon);  // two full failed episodes
  for (const auto& t : data) CHECK(t.r == 0.0);
}

TEST_CASE("normalizer: hand-computed statistics and z-scores") {
  Mat rows(4, 2, {1.0, 10.0, 3.0, 10.0, 5.0, 10.0, 7.0, 10.0});
  Normalizer n;
  CHECK_FALSE(n.fitted());
  n.fit(rows);
  REQUIRE(n.fitted());
  CHECK(n.mean()[0] == doctest::Approx(4.0));
  CHECK(n.mean()[1] == doctest::Approx(10.0));
  CHECK(n.stddev()[0] == doctest::Approx(std::sqrt(5.0)));  // population std
  CHECK(n.stddev()[1] == Normalizer::kStdFloor);            // constant column floored
  auto z = n.apply(std::vector<double>{6.0, 10.0});
  CHECK(z[0] == doctest::Approx(2.0 / std::sqrt(5.0)));
  CHECK(z[1] == 0.0);
  // fitted data maps to zero mean, unit variance (up to the floor)
  Mat zr = n.apply_rows(rows);
  double m = 0.0, v = 0.0;
  for (int r = 0; r < 4; ++r) m += zr.at(r, 0);
  m /= 4;
  for (int r = 0; r < 4; ++r) v += (zr.at(r, 0) - m) * (zr.at(r, 0) - m);
  CHECK(std::fabs(m) < 1e-12);
  CHECK(v / 4 == doctest::Approx(1.0));
}

TEST_CASE("normalizer: identity before fit, errors, round trip") {
  Normalizer n;
  std::vector<double> v{1.0, -2.0, 3.0};
  CHECK(n.apply(v) == v);
  Mat rows(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(n.apply_rows(rows).d == rows.d);
  CHECK_THROWS_AS(n.to_params(), UsageError);
  Mat empty(0, 3);
  CHECK_THROWS_AS(n.fit(empty), UsageError);

  n.fit(rows);
  CHECK_THROWS_AS(n.apply(std::vector<double>{1.0, 2.0}), ConfigError);

  Normalizer back = Normalizer::from_params(n.to_params());
  CHECK(back.apply(v) == n.apply(v));

  ParamVector bad = ParamVector::raw(4);  // zero stds
  CHECK_THROWS_AS(Normalizer::from_params(bad), ConfigError);
}

TEST_CASE("normalizer: per-row application matches the batched one") {
  Rng rng(25);
  Mat rows(50, 4);
  rng.normal_fill(rows.d);
  Normalizer n;
  n.fit(rows);
  Mat z = n.apply_rows(rows);
  for (int r = 0; r < rows.rows; ++r) {
    auto zr = n.apply(rows.row(r));
    for (int c = 0; c < rows.cols; ++c) CHECK(z.at(r, c) == zr[c]);
  }
}
