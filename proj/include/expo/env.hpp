#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "expo/rng.hpp"

namespace expo {

struct StepResult {
  std::vector<double> state;
  double reward = 0.0;
  bool done = false;      // episode over: success termination or horizon
  bool terminal = false;  // true termination; horizon cuts are not terminal
};

// Sparse-reward continuous-control task. Actions live in [-1,1]^action_dim
// (out-of-range inputs are clipped); rewards are 0 or 1; (seed, action
// sequence) -> trajectory is deterministic.
class Env {
 public:
  virtual ~Env() = default;

  virtual const char* name() const = 0;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual int horizon() const = 0;

  virtual std::vector<double> reset(Rng& rng) = 0;
  virtual StepResult step(std::span<const double> action) = 0;

  // Episode score in [0, 1]: success indicator for terminate-on-success
  // tasks, per-step normalized return for hold-at-goal tasks.
  virtual double episode_score(double total_reward) const = 0;

  // Success test used by the demo filter: any reward counts for
  // terminate-on-success tasks, the final step must pay for hold-at-goal.
  virtual bool episode_success(double total_reward, double last_reward) const = 0;
};

// Point mass navigating an 8x8 occupancy grid to a goal disc. Velocity
// integrates the action, speed is norm-clamped, and wall collisions zero the
// blocked velocity component while preserving the tangential one. The episode
// terminates on the first step inside the goal region.
class PointMaze final : public Env {
 public:
  static constexpr int kGridSize = 8;
  static constexpr double kDt = 0.2;
  static constexpr double kMaxSpeed = 2.0;
  static constexpr double kGoalX = 6.5;
  static constexpr double kGoalY = 6.5;
  static constexpr double kGoalRadius = 0.5;
  static constexpr double kStartX = 1.5;
  static constexpr double kStartY = 1.5;
  static constexpr double kStartJitter = 0.2;
  static constexpr int kHorizon = 300;

  // Occupancy of grid cell (row, col); anything outside the grid is a wall.
  static bool wall_cell(int row, int col);
  // Occupancy at a continuous position: cell (floor(y), floor(x)).
  static bool wall_at(double x, double y);

  const char* name() const override { return "point_maze"; }
  int state_dim() const override { return 4; }  // x, y, vx, vy
  int action_dim() const override { return 2; }
  int horizon() const override { return kHorizon; }

  std::vector<double> reset(Rng& rng) override;
  StepResult step(std::span<const double> action) override;

  double episode_score(double total_reward) const override {
    return total_reward > 0.0 ? 1.0 : 0.0;
  }
  bool episode_success(double total_reward, double /*last_reward*/) const override {
    return total_reward > 0.0;
  }

 private:
  std::vector<double> state() const { return {x_, y_, vx_, vy_}; }

  double x_ = 0.0, y_ = 0.0, vx_ = 0.0, vy_ = 0.0;
  int steps_ = 0;
};

// Reach-latch-lift manipulation toy: an end-effector point moves by scaled
// position deltas inside a box workspace; coming within the latch radius of
// the object grasps it permanently, after which the object tracks the
// end-effector. Reward pays every step the object is held above the lift
// threshold; the episode always runs to the horizon.
class ReachBox final : public Env {
 public:
  static constexpr double kStepSize = 0.2;
  static constexpr double kLatchRadius = 0.12;
  static constexpr double kLiftThreshold = 0.25;
  static constexpr double kTrayHalfExtent = 0.15;  // object spawn region in x, y
  static constexpr double kBoundXY = 0.6;          // workspace half-extent in x, y
  static constexpr double kBoundZ = 0.8;           // workspace height
  static constexpr double kStartZ = 0.4;           // end-effector start height
  static constexpr int kHorizon = 100;

  const char* name() const override { return "reach_box"; }
  int state_dim() const override { return 7; }  // ee xyz, object xyz, latched
  int action_dim() const override { return 3; }
  int horizon() const override { return kHorizon; }

  std::vector<double> reset(Rng& rng) override;
  StepResult step(std::span<const double> action) override;

  double episode_score(double total_reward) const override {
    return total_reward / kHorizon;
  }
  bool episode_success(double /*total_reward*/, double last_reward) const override {
    return last_reward == 1.0;
  }

 private:
  std::vector<double> state() const {
    return {ee_[0], ee_[1], ee_[2], obj_[0], obj_[1], obj_[2], latched_ ? 1.0 : 0.0};
  }

  double ee_[3] = {0.0, 0.0, 0.0};
  double obj_[3] = {0.0, 0.0, 0.0};
  bool latched_ = false;
  int steps_ = 0;
};

// Factory over the built-in task names ("point_maze", "reach_box").
std::unique_ptr<Env> make_env(const std::string& name);

}  // namespace expo
