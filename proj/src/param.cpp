#include "expo/param.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "expo/errors.hpp"

namespace expo {

std::size_t dense_chain_count(std::span<const std::uint32_t> widths) {
  std::size_t n = 0;
  for (std::size_t i = 1; i < widths.size(); ++i)
    n += (static_cast<std::size_t>(widths[i - 1]) + 1) * widths[i];
  return n;
}

ParamVector ParamVector::dense_chain(std::vector<std::uint32_t> widths) {
  if (widths.size() < 2) throw ConfigError("dense chain needs at least two widths");
  for (auto w : widths)
    if (w == 0) throw ConfigError("layer width must be positive");
  ParamVector p;
  p.v_.assign(dense_chain_count(widths), 0.0);
  p.widths_ = std::move(widths);
  return p;
}

ParamVector ParamVector::raw(std::uint32_t n) {
  ParamVector p;
  p.widths_ = {n};
  p.v_.assign(n, 0.0);
  return p;
}

bool ParamVector::all_finite() const {
  for (double x : v_)
    if (!std::isfinite(x)) return false;
  return true;
}

std::vector<DenseSlice> dense_slices(const ParamVector& p) {
  const auto& w = p.layout();
  if (w.size() < 2) throw ConfigError("not a dense-chain layout");
  std::vector<DenseSlice> out;
  std::size_t off = 0;
  for (std::size_t i = 1; i < w.size(); ++i) {
    DenseSlice s;
    s.in = w[i - 1];
    s.out = w[i];
    s.w_off = off;
    off += static_cast<std::size_t>(s.in) * s.out;
    s.b_off = off;
    off += s.out;
    out.push_back(s);
  }
  return out;
}

namespace {

void put_u32(std::ofstream& f, std::uint32_t x) {
  unsigned char b[4] = {static_cast<unsigned char>(x), static_cast<unsigned char>(x >> 8),
                        static_cast<unsigned char>(x >> 16), static_cast<unsigned char>(x >> 24)};
  f.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& f) {
  unsigned char b[4];
  f.read(reinterpret_cast<char*>(b), 4);
  if (!f) throw IoError("truncated checkpoint header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParamVector& p) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint for writing: " + path.string());
  put_u32(f, static_cast<std::uint32_t>(p.layout().size()));
  for (auto w : p.layout()) put_u32(f, w);
  std::vector<float> buf(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) buf[i] = static_cast<float>(p[i]);
  static_assert(sizeof(float) == 4);
  f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 4));
  if (!f) throw IoError("short write: " + path.string());
}

ParamVector load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint: " + path.string());
  std::uint32_t nw = get_u32(f);
  if (nw == 0 || nw > 1024) throw IoError("corrupt checkpoint header: " + path.string());
  std::vector<std::uint32_t> widths(nw);
  for (auto& w : widths) w = get_u32(f);
  ParamVector p = (nw == 1) ? ParamVector::raw(widths[0]) : ParamVector::dense_chain(widths);
  std::vector<float> buf(p.size());
  f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 4));
  if (!f) throw IoError("truncated checkpoint: " + path.string());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = buf[i];
  if (!p.all_finite()) throw IoError("checkpoint holds non-finite values: " + path.string());
  return p;
}

}  // namespace expo
