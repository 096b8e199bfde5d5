#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace expo {

// Flat parameter storage with an immutable layout. A layout with two or more
// entries describes a dense chain: layer i has (widths[i-1]+1)*widths[i]
// parameters (weights then bias). A single-entry layout {n} is a raw vector
// of n values (optimizer scalars, normalizer statistics).
class ParamVector {
 public:
  ParamVector() = default;

  static ParamVector dense_chain(std::vector<std::uint32_t> widths);
  static ParamVector raw(std::uint32_t n);

  std::size_t size() const { return v_.size(); }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }
  std::span<double> values() { return v_; }
  std::span<const double> values() const { return v_; }

  const std::vector<std::uint32_t>& layout() const { return widths_; }
  bool same_layout(const ParamVector& o) const { return widths_ == o.widths_; }
  bool all_finite() const;

 private:
  std::vector<std::uint32_t> widths_;
  std::vector<double> v_;
};

std::size_t dense_chain_count(std::span<const std::uint32_t> widths);

// One dense layer's slice of a chain-layout ParamVector.
struct DenseSlice {
  std::uint32_t in = 0;
  std::uint32_t out = 0;
  std::size_t w_off = 0;  // in*out weights, row-major (in, out)
  std::size_t b_off = 0;  // out biases
};
std::vector<DenseSlice> dense_slices(const ParamVector& p);

// .ckpt: little-endian u32 count, u32 widths, then float32 values.
void save_checkpoint(const std::filesystem::path& path, const ParamVector& p);
ParamVector load_checkpoint(const std::filesystem::path& path);

}  // namespace expo
