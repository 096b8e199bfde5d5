#include "expo/metrics.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "expo/errors.hpp"

namespace expo {

std::string format_metrics_row(const MetricsRow& r) {
  char buf[192];
  std::snprintf(buf, sizeof buf, "%ld,%.9g,%.9g,%.9g,%.9g,%.9g", r.env_step, r.success,
                r.mean_q_selected, r.alpha, r.edited_win_frac, r.wall_clock);
  return buf;
}

namespace {

[[noreturn]] void bad(const std::filesystem::path& path, int line, const std::string& what) {
  throw SchemaError("metrics file " + path.string() + " line " + std::to_string(line) + ": " +
                    what);
}

double field_double(const std::string& v, const std::filesystem::path& path, int line) {
  errno = 0;
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (v.empty() || errno != 0 || end != v.c_str() + v.size())
    bad(path, line, "bad numeric field '" + v + "'");
  return x;
}

}  // namespace

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open metrics file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) bad(path, 1, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetricsHeader)
    bad(path, 1, "header mismatch (expected '" + std::string(kMetricsHeader) + "')");

  std::vector<MetricsRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 6) bad(path, line_no, "expected 6 fields");
    MetricsRow r;
    errno = 0;
    char* end = nullptr;
    long long step = std::strtoll(fields[0].c_str(), &end, 10);
    if (fields[0].empty() || errno != 0 || end != fields[0].c_str() + fields[0].size())
      bad(path, line_no, "bad env_step '" + fields[0] + "'");
    r.env_step = static_cast<long>(step);
    r.success = field_double(fields[1], path, line_no);
    r.mean_q_selected = field_double(fields[2], path, line_no);
    r.alpha = field_double(fields[3], path, line_no);
    r.edited_win_frac = field_double(fields[4], path, line_no);
    r.wall_clock = field_double(fields[5], path, line_no);
    if (!rows.empty() && r.env_step <= rows.back().env_step)
      bad(path, line_no, "env_step must be strictly increasing");
    rows.push_back(r);
  }
  if (rows.empty()) bad(path, line_no, "no data rows");
  return rows;
}

}  // namespace expo
