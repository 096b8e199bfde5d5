#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "expo/mat.hpp"
#include "expo/rng.hpp"

namespace expo {

// One (s, a, r, s', done) tuple; the unit of replay storage.
struct Transition {
  std::vector<double> s;
  std::vector<double> a;
  double r = 0.0;
  std::vector<double> s_next;
  bool done = false;
};

// Replay storage: an offline prefix that is never evicted, followed by a ring
// of online transitions. Sampling is uniform with replacement over the pooled
// contents; a symmetric 50/50 offline/online mode is available behind a flag.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int state_dim, int action_dim);

  // Installs the offline dataset as the pinned prefix. Buffer must be empty.
  void seed(const std::vector<Transition>& dataset);

  void push(Transition t);

  std::vector<Transition> sample(std::size_t batch_size, Rng& rng) const;
  std::vector<Transition> sample_symmetric(std::size_t batch_size, Rng& rng) const;

  const Transition& at(std::size_t i) const { return store_[i]; }

  std::size_t count() const { return store_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t offline_count() const { return offline_count_; }
  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }

 private:
  void check_dims(const Transition& t) const;

  std::size_t capacity_ = 0;
  int state_dim_ = 0;
  int action_dim_ = 0;
  std::size_t offline_count_ = 0;
  std::size_t next_evict_ = 0;  // ring cursor over the online region
  bool seeded_ = false;
  std::vector<Transition> store_;
};

// A sampled batch in matrix form (one row per transition).
struct BatchMats {
  Mat s, a, s_next;
  std::vector<double> r, done;
};
BatchMats to_mats(const std::vector<Transition>& batch);

// .tds dataset files: little-endian u32 state_dim, action_dim, count, then
// `count` packed records of float32 s, a, r, s' and one done byte.
void save_dataset(const std::filesystem::path& path, const std::vector<Transition>& data,
                  int state_dim, int action_dim);
std::vector<Transition> load_dataset(const std::filesystem::path& path, int& state_dim,
                                     int& action_dim);

}  // namespace expo
