#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "expo/metrics.hpp"

namespace expo {

// One labeled bundle of runs: a mean curve plus, with two or more runs, a
// pointwise min-max band.
struct CurveGroup {
  std::string label;
  std::vector<std::vector<MetricsRow>> runs;
};

// Buckets metrics CSVs for plotting. Files sharing a sibling config.ini hash
// (seed and out_dir excluded) land in one group labeled
// "<env> <variant> #<hash6>"; files without a config land in singleton
// groups labeled by filename. Groups come back sorted by label.
std::vector<CurveGroup> group_metrics_files(const std::vector<std::filesystem::path>& csvs);

// Renders evaluation success over env steps as a standalone SVG: one mean
// line per group, min-max band when a group holds several runs.
std::string render_curves_svg(const std::vector<CurveGroup>& groups);

// group_metrics_files + render_curves_svg + write to out_path.
void plot_csvs(const std::vector<std::filesystem::path>& csvs,
               const std::filesystem::path& out_path);

}  // namespace expo
