#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace expo {

// One evaluation-time log record. Serialized as CSV with the header below;
// env_step is strictly increasing within a file.
struct MetricsRow {
  long env_step = 0;
  double success = 0.0;          // mean evaluation episode score
  double mean_q_selected = 0.0;  // mean Q of argmax-selected backup candidates
  double alpha = 0.0;            // edit-policy temperature
  double edited_win_frac = 0.0;  // fraction of backups an edited candidate won
  double wall_clock = 0.0;       // seconds since run start
};

inline constexpr const char* kMetricsHeader =
    "env_step,success,mean_q_selected,alpha,edited_win_frac,wall_clock";

// One CSV line (no newline); floats as %.9g.
std::string format_metrics_row(const MetricsRow& r);

// Parses a metrics CSV. SchemaError when the header differs from
// kMetricsHeader, a row is malformed, or there are no data rows;
// IoError when the file cannot be read.
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

}  // namespace expo
