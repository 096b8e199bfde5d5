#include "expo/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "expo/config.hpp"
#include "expo/errors.hpp"

namespace expo {

std::vector<CurveGroup> group_metrics_files(const std::vector<std::filesystem::path>& csvs) {
  if (csvs.empty()) throw UsageError("plotting needs at least one metrics file");
  // Keyed map keeps grouping deterministic regardless of argument order.
  std::map<std::string, CurveGroup> by_key;
  for (const std::filesystem::path& csv : csvs) {
    std::vector<MetricsRow> rows = read_metrics_csv(csv);
    std::string key, label;
    std::filesystem::path cfg_path = csv.parent_path() / "config.ini";
    if (std::filesystem::exists(cfg_path)) {
      RunConfig rc = load_run_config(cfg_path, /*apply_env_override=*/false);
      char hex[32];
      std::snprintf(hex, sizeof hex, "%06llx",
                    static_cast<unsigned long long>(config_hash(rc) & 0xFFFFFF));
      label = rc.env_name + " " + variant_name(rc.agent.variant) + " #" + hex;
      key = label;
    } else {
      label = csv.stem().string();
      key = "\x7f" + csv.string();  // singleton group, sorted after configured ones
    }
    CurveGroup& g = by_key[key];
    g.label = label;
    g.runs.push_back(std::move(rows));
  }
  std::vector<CurveGroup> out;
  out.reserve(by_key.size());
  for (auto& [key, group] : by_key) out.push_back(std::move(group));
  return out;
}

namespace {

constexpr double kW = 840, kH = 520;
constexpr double kL = 72, kR = 24, kTop = 28, kBot = 56;  // margins

const char* kPalette[] = {"#2563eb", "#dc2626", "#059669", "#d97706",
                          "#7c3aed", "#0891b2", "#be185d", "#4d7c0f"};

std::string num(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string step_label(double v) {
  char buf[48];
  if (v >= 1000.0 && std::fmod(v, 1000.0) == 0.0)
    std::snprintf(buf, sizeof buf, "%gk", v / 1000.0);
  else
    std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string render_curves_svg(const std::vector<CurveGroup>& groups) {
  if (groups.empty()) throw UsageError("nothing to plot");

  long max_step = 1;
  for (const CurveGroup& g : groups)
    for (const std::vector<MetricsRow>& run : g.runs)
      max_step = std::max(max_step, run.back().env_step);

  const double plot_w = kW - kL - kR, plot_h = kH - kTop - kBot;
  auto px = [&](double step) { return kL + plot_w * (step / static_cast<double>(max_step)); };
  auto py = [&](double v) { return kTop + plot_h * (1.0 - std::clamp(v, 0.0, 1.0)); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
  s << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"#ffffff\"/>\n";
  s << "<g font-family=\"sans-serif\" font-size=\"13\" fill=\"#333333\">\n";

  // Gridlines and ticks.
  for (int i = 0; i <= 4; ++i) {
    double v = i / 4.0;
    s << "<line x1=\"" << num(kL) << "\" y1=\"" << num(py(v)) << "\" x2=\"" << num(kL + plot_w)
      << "\" y2=\"" << num(py(v)) << "\" stroke=\"#e5e5e5\"/>\n";
    s << "<text x=\"" << num(kL - 8) << "\" y=\"" << num(py(v) + 4)
      << "\" text-anchor=\"end\">" << num(v) << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    double step = max_step * (i / 5.0);
    s << "<line x1=\"" << num(px(step)) << "\" y1=\"" << num(kTop + plot_h) << "\" x2=\""
      << num(px(step)) << "\" y2=\"" << num(kTop + plot_h + 5) << "\" stroke=\"#333333\"/>\n";
    s << "<text x=\"" << num(px(step)) << "\" y=\"" << num(kTop + plot_h + 20)
      << "\" text-anchor=\"middle\">" << step_label(step) << "</text>\n";
  }
  s << "<line x1=\"" << num(kL) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kL)
    << "\" y2=\"" << num(kTop + plot_h) << "\" stroke=\"#333333\"/>\n";
  s << "<line x1=\"" << num(kL) << "\" y1=\"" << num(kTop + plot_h) << "\" x2=\""
    << num(kL + plot_w) << "\" y2=\"" << num(kTop + plot_h) << "\" stroke=\"#333333\"/>\n";
  s << "<text x=\"" << num(kL + plot_w / 2) << "\" y=\"" << num(kH - 14)
    << "\" text-anchor=\"middle\">environment steps</text>\n";
  s << "<text x=\"18\" y=\"" << num(kTop + plot_h / 2)
    << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << num(kTop + plot_h / 2)
    << ")\">evaluation success</text>\n";

  // Curves: band first (when several runs), then the mean line.
  int color_i = 0;
  for (const CurveGroup& g : groups) {
    const char* color = kPalette[color_i % 8];
    ++color_i;
    std::size_t len = g.runs.front().size();
    for (const std::vector<MetricsRow>& run : g.runs) len = std::min(len, run.size());

    std::vector<double> mean(len), lo(len), hi(len);
    std::vector<long> steps(len);
    for (std::size_t i = 0; i < len; ++i) {
      steps[i] = g.runs.front()[i].env_step;
      double m = 0.0, l = g.runs.front()[i].success, h = l;
      for (const std::vector<MetricsRow>& run : g.runs) {
        double v = run[i].success;
        m += v;
        l = std::min(l, v);
        h = std::max(h, v);
      }
      mean[i] = m / static_cast<double>(g.runs.size());
      lo[i] = l;
      hi[i] = h;
    }

    if (g.runs.size() >= 2 && len >= 2) {
      s << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < len; ++i)
        s << num(px(static_cast<double>(steps[i]))) << "," << num(py(hi[i])) << " ";
      for (std::size_t i = len; i-- > 0;)
        s << num(px(static_cast<double>(steps[i]))) << "," << num(py(lo[i])) << " ";
      s << "\"/>\n";
    }
    if (len == 1) {
      s << "<circle cx=\"" << num(px(static_cast<double>(steps[0]))) << "\" cy=\""
        << num(py(mean[0])) << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
    } else {
      s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (std::size_t i = 0; i < len; ++i)
        s << num(px(static_cast<double>(steps[i]))) << "," << num(py(mean[i])) << " ";
      s << "\"/>\n";
    }
  }

  // Legend.
  double ly = kTop + 10;
  color_i = 0;
  for (const CurveGroup& g : groups) {
    const char* color = kPalette[color_i % 8];
    ++color_i;
    s << "<line x1=\"" << num(kL + 12) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(kL + 40)
      << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << num(kL + 46) << "\" y=\"" << num(ly + 4) << "\">" << g.label
      << " (" << g.runs.size() << (g.runs.size() == 1 ? " run" : " runs") << ")</text>\n";
    ly += 18;
  }

  s << "</g>\n</svg>\n";
  return s.str();
}

void plot_csvs(const std::vector<std::filesystem::path>& csvs,
               const std::filesystem::path& out_path) {
  std::string svg = render_curves_svg(group_metrics_files(csvs));
  if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open plot output: " + out_path.string());
  out << svg;
  if (!out) throw IoError("failed writing plot: " + out_path.string());
}

}  // namespace expo
