#include "expo/demos.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <string>

#include "expo/errors.hpp"

namespace expo {

namespace {

double clip1(double v) { return std::clamp(v, -1.0, 1.0); }

// Shortest cell path through the maze's free space, start to goal inclusive.
std::vector<std::array<int, 2>> bfs_path(int start_row, int start_col, int goal_row,
                                         int goal_col) {
  constexpr int G = PointMaze::kGridSize;
  std::array<int, G * G> parent;
  parent.fill(-1);
  auto id = [](int r, int c) { return r * G + c; };
  std::deque<std::array<int, 2>> queue;
  queue.push_back({start_row, start_col});
  parent[id(start_row, start_col)] = id(start_row, start_col);
  while (!queue.empty()) {
    auto [r, c] = queue.front();
    queue.pop_front();
    if (r == goal_row && c == goal_col) break;
    constexpr int dr[4] = {1, -1, 0, 0};
    constexpr int dc[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      int nr = r + dr[k], nc = c + dc[k];
      if (PointMaze::wall_cell(nr, nc) || parent[id(nr, nc)] >= 0) continue;
      parent[id(nr, nc)] = id(r, c);
      queue.push_back({nr, nc});
    }
  }
  std::vector<std::array<int, 2>> path;
  if (parent[id(goal_row, goal_col)] < 0) return path;  // unreachable
  int cur = id(goal_row, goal_col);
  while (true) {
    path.push_back({cur / G, cur % G});
    if (cur == id(start_row, start_col)) break;
    cur = parent[cur];
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

Demonstrator::Demonstrator(const Env& env, double sigma_demo, bool success_filter,
                           DemoGains gains)
    : sigma_(sigma_demo), filter_(success_filter), gains_(gains) {
  std::string name = env.name();
  if (name == "point_maze") {
    kind_ = Kind::maze;
  } else if (name == "reach_box") {
    kind_ = Kind::box;
  } else {
    throw ConfigError("no demonstrator for environment: " + name);
  }
  if (sigma_ < 0.0) throw ConfigError("demo noise scale must be >= 0");
}

void Demonstrator::begin_episode(std::span<const double> state) {
  wp_idx_ = 0;
  waypoints_.clear();
  if (kind_ != Kind::maze) return;
  int row = static_cast<int>(std::floor(state[1]));
  int col = static_cast<int>(std::floor(state[0]));
  auto cells = bfs_path(row, col, static_cast<int>(PointMaze::kGoalY),
                        static_cast<int>(PointMaze::kGoalX));
  for (const auto& cell : cells)
    waypoints_.push_back({cell[1] + 0.5, cell[0] + 0.5});  // cell centers (x, y)
  if (waypoints_.empty()) waypoints_.push_back({PointMaze::kGoalX, PointMaze::kGoalY});
}

std::vector<double> Demonstrator::maze_action(std::span<const double> state) const {
  double x = state[0], y = state[1], vx = state[2], vy = state[3];
  while (wp_idx_ + 1 < waypoints_.size() &&
         std::hypot(waypoints_[wp_idx_][0] - x, waypoints_[wp_idx_][1] - y) <
             gains_.advance_radius)
    ++wp_idx_;
  const auto& wp = waypoints_[wp_idx_];
  return {clip1(gains_.kp * (wp[0] - x) - gains_.kd * vx),
          clip1(gains_.kp * (wp[1] - y) - gains_.kd * vy)};
}

std::vector<double> Demonstrator::box_action(std::span<const double> state) const {
  double target[3];
  if (state[6] < 0.5) {  // not latched: head straight for the object
    target[0] = state[3];
    target[1] = state[4];
    target[2] = state[5];
  } else {  // latched: lift in place and hold
    target[0] = state[0];
    target[1] = state[1];
    target[2] = 0.55;
  }
  std::vector<double> a(3);
  for (int i = 0; i < 3; ++i)
    a[i] = clip1((target[i] - state[i]) / ReachBox::kStepSize);
  return a;
}

std::vector<double> Demonstrator::action(std::span<const double> state, Rng& rng) {
  std::vector<double> a =
      kind_ == Kind::maze ? maze_action(state) : box_action(state);
  if (sigma_ > 0.0)
    for (double& v : a) v = clip1(v + sigma_ * rng.normal());
  return a;
}

std::vector<Transition> generate_demos(Env& env, Demonstrator& demo, int n_traj, Rng& rng) {
  if (n_traj < 1) throw UsageError("demo generation needs n_traj >= 1");
  const long max_attempts = 100L * n_traj;
  long attempts = 0;
  int kept = 0;
  std::vector<Transition> out;
  while (kept < n_traj) {
    if (attempts >= max_attempts)
      throw GenerationError("demo generation spent " + std::to_string(max_attempts) +
                            " attempts with only " + std::to_string(kept) + "/" +
                            std::to_string(n_traj) + " successes");
    ++attempts;
    std::vector<double> s = env.reset(rng);
    demo.begin_episode(s);
    std::vector<Transition> episode;
    double total = 0.0, last = 0.0;
    bool done = false;
    while (!done) {
      std::vector<double> a = demo.action(s, rng);
      StepResult sr = env.step(a);
      Transition t;
      t.s = s;
      t.a = std::move(a);
      t.r = sr.reward;
      t.s_next = sr.state;
      t.done = sr.terminal;
      episode.push_back(std::move(t));
      total += sr.reward;
      last = sr.reward;
      done = sr.done;
      s = sr.state;
    }
    if (demo.success_filter() && !env.episode_success(total, last)) continue;
    ++kept;
    out.insert(out.end(), std::make_move_iterator(episode.begin()),
               std::make_move_iterator(episode.end()));
  }
  return out;
}

}  // namespace expo
