#include "expo/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "expo/errors.hpp"

namespace expo {

namespace {

// 1 = wall. Row index is floor(y), column index is floor(x); the border ring
// is solid so positions can never leave the grid.
constexpr std::uint8_t kWalls[PointMaze::kGridSize][PointMaze::kGridSize] = {
    {1, 1, 1, 1, 1, 1, 1, 1},
    {1, 0, 0, 1, 1, 0, 0, 1},
    {1, 0, 0, 1, 0, 0, 0, 1},
    {1, 1, 0, 0, 0, 1, 1, 1},
    {1, 0, 0, 1, 0, 0, 0, 1},
    {1, 0, 1, 0, 0, 1, 0, 1},
    {1, 0, 0, 0, 1, 0, 0, 1},
    {1, 1, 1, 1, 1, 1, 1, 1},
};

double clip1(double v) { return std::clamp(v, -1.0, 1.0); }

}  // namespace

bool PointMaze::wall_cell(int row, int col) {
  if (row < 0 || row >= kGridSize || col < 0 || col >= kGridSize) return true;
  return kWalls[row][col] != 0;
}

bool PointMaze::wall_at(double x, double y) {
  return wall_cell(static_cast<int>(std::floor(y)), static_cast<int>(std::floor(x)));
}

std::vector<double> PointMaze::reset(Rng& rng) {
  x_ = kStartX + rng.uniform(-kStartJitter, kStartJitter);
  y_ = kStartY + rng.uniform(-kStartJitter, kStartJitter);
  vx_ = vy_ = 0.0;
  steps_ = 0;
  return state();
}

StepResult PointMaze::step(std::span<const double> action) {
  if (action.size() != 2) throw ConfigError("point_maze action must be 2-dimensional");
  vx_ += clip1(action[0]);
  vy_ += clip1(action[1]);
  double speed = std::hypot(vx_, vy_);
  if (speed > kMaxSpeed) {
    vx_ *= kMaxSpeed / speed;
    vy_ *= kMaxSpeed / speed;
  }
  // Axis-separated move: a blocked axis keeps its coordinate and zeroes that
  // velocity component (the collision normal); the other axis is unaffected.
  double nx = x_ + vx_ * kDt;
  if (wall_at(nx, y_)) {
    vx_ = 0.0;
  } else {
    x_ = nx;
  }
  double ny = y_ + vy_ * kDt;
  if (wall_at(x_, ny)) {
    vy_ = 0.0;
  } else {
    y_ = ny;
  }
  ++steps_;

  StepResult out;
  out.state = state();
  bool success = std::hypot(x_ - kGoalX, y_ - kGoalY) <= kGoalRadius;
  out.reward = success ? 1.0 : 0.0;
  out.terminal = success;
  out.done = success || steps_ >= kHorizon;
  return out;
}

std::vector<double> ReachBox::reset(Rng& rng) {
  ee_[0] = 0.0;
  ee_[1] = 0.0;
  ee_[2] = kStartZ;
  obj_[0] = rng.uniform(-kTrayHalfExtent, kTrayHalfExtent);
  obj_[1] = rng.uniform(-kTrayHalfExtent, kTrayHalfExtent);
  obj_[2] = 0.0;
  latched_ = false;
  steps_ = 0;
  return state();
}

StepResult ReachBox::step(std::span<const double> action) {
  if (action.size() != 3) throw ConfigError("reach_box action must be 3-dimensional");
  for (int i = 0; i < 3; ++i) ee_[i] += kStepSize * clip1(action[i]);
  ee_[0] = std::clamp(ee_[0], -kBoundXY, kBoundXY);
  ee_[1] = std::clamp(ee_[1], -kBoundXY, kBoundXY);
  ee_[2] = std::clamp(ee_[2], 0.0, kBoundZ);

  if (!latched_) {
    double dx = ee_[0] - obj_[0], dy = ee_[1] - obj_[1], dz = ee_[2] - obj_[2];
    if (std::sqrt(dx * dx + dy * dy + dz * dz) < kLatchRadius) latched_ = true;
  }
  if (latched_) {
    obj_[0] = ee_[0];
    obj_[1] = ee_[1];
    obj_[2] = ee_[2];
  }
  ++steps_;

  StepResult out;
  out.state = state();
  out.reward = (latched_ && obj_[2] > kLiftThreshold) ? 1.0 : 0.0;
  out.terminal = false;  // the task is to hold the object up, not to exit
  out.done = steps_ >= kHorizon;
  return out;
}

std::unique_ptr<Env> make_env(const std::string& name) {
  if (name == "point_maze") return std::make_unique<PointMaze>();
  if (name == "reach_box") return std::make_unique<ReachBox>();
  throw ConfigError("unknown environment: " + name);
}

}  // namespace expo
