#pragma once

#include <array>
#include <span>
#include <vector>

#include "expo/env.hpp"
#include "expo/replay.hpp"

namespace expo {

// Proportional-control gains for the maze waypoint follower.
struct DemoGains {
  double kp = 2.0;
  double kd = 1.0;
  double advance_radius = 0.35;
};

// Scripted expert for the built-in tasks: a breadth-first-search waypoint
// follower for the maze, a reach-latch-lift phase script for the box task.
// Action noise (sigma_demo) degrades demonstration quality on purpose; the
// success filter keeps only successful episodes.
class Demonstrator {
 public:
  explicit Demonstrator(const Env& env, double sigma_demo = 0.0, bool success_filter = true,
                        DemoGains gains = {});

  // Plans the episode (maze: waypoints from the start cell to the goal cell).
  void begin_episode(std::span<const double> state);

  // Control action for the current state, noise included, clipped to the box.
  std::vector<double> action(std::span<const double> state, Rng& rng);

  double sigma() const { return sigma_; }
  bool success_filter() const { return filter_; }
  const std::vector<std::array<double, 2>>& waypoints() const { return waypoints_; }

 private:
  enum class Kind { maze, box };

  std::vector<double> maze_action(std::span<const double> state) const;
  std::vector<double> box_action(std::span<const double> state) const;

  Kind kind_ = Kind::maze;
  double sigma_ = 0.0;
  bool filter_ = true;
  DemoGains gains_;
  std::vector<std::array<double, 2>> waypoints_;
  mutable std::size_t wp_idx_ = 0;
};

// Runs episodes until n_traj are kept (the success filter discards and
// retries failures) and returns their transitions flattened in order. The
// stored done flag marks true termination only, so horizon cuts bootstrap.
// Throws GenerationError once 100 * n_traj episode attempts are spent.
std::vector<Transition> generate_demos(Env& env, Demonstrator& demo, int n_traj, Rng& rng);

}  // namespace expo
