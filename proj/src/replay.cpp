#include "expo/replay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "expo/errors.hpp"

namespace expo {

ReplayBuffer::ReplayBuffer(std::size_t capacity, int state_dim, int action_dim)
    : capacity_(capacity), state_dim_(state_dim), action_dim_(action_dim) {
  if (capacity == 0) throw ConfigError("replay capacity must be positive");
  if (state_dim <= 0 || action_dim <= 0) throw ConfigError("replay dims must be positive");
}

void ReplayBuffer::check_dims(const Transition& t) const {
  if (static_cast<int>(t.s.size()) != state_dim_ ||
      static_cast<int>(t.s_next.size()) != state_dim_ ||
      static_cast<int>(t.a.size()) != action_dim_)
    throw ConfigError("transition dims do not match buffer");
  if (!std::isfinite(t.r)) throw ConfigError("non-finite reward");
}

void ReplayBuffer::seed(const std::vector<Transition>& dataset) {
  if (seeded_ || !store_.empty()) throw UsageError("replay buffer already seeded");
  if (dataset.size() > capacity_) throw ConfigError("offline dataset exceeds replay capacity");
  for (const auto& t : dataset) check_dims(t);
  store_ = dataset;
  offline_count_ = dataset.size();
  seeded_ = true;
}

void ReplayBuffer::push(Transition t) {
  check_dims(t);
  if (store_.size() < capacity_) {
    store_.push_back(std::move(t));
    return;
  }
  // Full: evict the oldest online entry, never the offline prefix.
  if (offline_count_ >= capacity_)
    throw ConfigError("replay capacity filled entirely by pinned offline data");
  std::size_t online_slots = capacity_ - offline_count_;
  store_[offline_count_ + next_evict_] = std::move(t);
  next_evict_ = (next_evict_ + 1) % online_slots;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
  if (store_.empty()) throw UsageError("sample from empty replay buffer");
  std::vector<Transition> out;
  out.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i)
    out.push_back(store_[rng.uniform_int(store_.size())]);
  return out;
}

std::vector<Transition> ReplayBuffer::sample_symmetric(std::size_t batch_size, Rng& rng) const {
  if (store_.empty()) throw UsageError("sample from empty replay buffer");
  std::size_t online_count = store_.size() - offline_count_;
  if (offline_count_ == 0 || online_count == 0) return sample(batch_size, rng);
  std::vector<Transition> out;
  out.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    if (i % 2 == 0)
      out.push_back(store_[rng.uniform_int(offline_count_)]);
    else
      out.push_back(store_[offline_count_ + rng.uniform_int(online_count)]);
  }
  return out;
}

BatchMats to_mats(const std::vector<Transition>& batch) {
  if (batch.empty()) throw UsageError("to_mats: empty batch");
  int B = static_cast<int>(batch.size());
  int sd = static_cast<int>(batch[0].s.size());
  int ad = static_cast<int>(batch[0].a.size());
  BatchMats m{Mat(B, sd), Mat(B, ad), Mat(B, sd), std::vector<double>(B), std::vector<double>(B)};
  for (int i = 0; i < B; ++i) {
    const Transition& t = batch[i];
    std::copy(t.s.begin(), t.s.end(), m.s.d.begin() + static_cast<std::size_t>(i) * sd);
    std::copy(t.a.begin(), t.a.end(), m.a.d.begin() + static_cast<std::size_t>(i) * ad);
    std::copy(t.s_next.begin(), t.s_next.end(),
              m.s_next.d.begin() + static_cast<std::size_t>(i) * sd);
    m.r[i] = t.r;
    m.done[i] = t.done ? 1.0 : 0.0;
  }
  return m;
}

namespace {

void put_u32(std::FILE* f, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  if (std::fwrite(b, 1, 4, f) != 4) throw IoError("dataset write failed");
}

std::uint32_t get_u32(std::FILE* f) {
  unsigned char b[4];
  if (std::fread(b, 1, 4, f) != 4) throw IoError("dataset truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32s(std::FILE* f, const double* v, std::size_t n, std::vector<float>& scratch) {
  scratch.resize(n);
  for (std::size_t i = 0; i < n; ++i) scratch[i] = static_cast<float>(v[i]);
  if (std::fwrite(scratch.data(), 4, n, f) != n) throw IoError("dataset write failed");
}

void get_f32s(std::FILE* f, double* v, std::size_t n, std::vector<float>& scratch) {
  scratch.resize(n);
  if (std::fread(scratch.data(), 4, n, f) != n) throw IoError("dataset truncated");
  for (std::size_t i = 0; i < n; ++i) v[i] = scratch[i];
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

}  // namespace

void save_dataset(const std::filesystem::path& path, const std::vector<Transition>& data,
                  int state_dim, int action_dim) {
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.string().c_str(), "wb"));
  if (!f) throw IoError("cannot open dataset file for writing: " + path.string());
  put_u32(f.get(), static_cast<std::uint32_t>(state_dim));
  put_u32(f.get(), static_cast<std::uint32_t>(action_dim));
  put_u32(f.get(), static_cast<std::uint32_t>(data.size()));
  std::vector<float> scratch;
  for (const auto& t : data) {
    if (static_cast<int>(t.s.size()) != state_dim || static_cast<int>(t.a.size()) != action_dim ||
        static_cast<int>(t.s_next.size()) != state_dim)
      throw ConfigError("transition dims do not match dataset header");
    put_f32s(f.get(), t.s.data(), t.s.size(), scratch);
    put_f32s(f.get(), t.a.data(), t.a.size(), scratch);
    double r = t.r;
    put_f32s(f.get(), &r, 1, scratch);
    put_f32s(f.get(), t.s_next.data(), t.s_next.size(), scratch);
    unsigned char done = t.done ? 1 : 0;
    if (std::fwrite(&done, 1, 1, f.get()) != 1) throw IoError("dataset write failed");
  }
}

std::vector<Transition> load_dataset(const std::filesystem::path& path, int& state_dim,
                                     int& action_dim) {
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.string().c_str(), "rb"));
  if (!f) throw IoError("cannot open dataset file: " + path.string());
  std::uint32_t sd = get_u32(f.get());
  std::uint32_t ad = get_u32(f.get());
  std::uint32_t n = get_u32(f.get());
  if (sd == 0 || ad == 0 || sd > 4096 || ad > 4096) throw IoError("corrupt dataset header");
  state_dim = static_cast<int>(sd);
  action_dim = static_cast<int>(ad);
  std::vector<Transition> out;
  out.reserve(n);
  std::vector<float> scratch;
  for (std::uint32_t i = 0; i < n; ++i) {
    Transition t;
    t.s.resize(sd);
    t.a.resize(ad);
    t.s_next.resize(sd);
    get_f32s(f.get(), t.s.data(), sd, scratch);
    get_f32s(f.get(), t.a.data(), ad, scratch);
    get_f32s(f.get(), &t.r, 1, scratch);
    get_f32s(f.get(), t.s_next.data(), sd, scratch);
    unsigned char done = 0;
    if (std::fread(&done, 1, 1, f.get()) != 1) throw IoError("dataset truncated");
    t.done = done != 0;
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace expo
