#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "expo/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Diffusion-policy reinforcement learning: train, demo generation, "
               "evaluation, and learning-curve plotting"};
  app.require_subcommand(1);

  std::string config_path;
  auto* train = app.add_subcommand("train", "Run a training job from a config file");
  train->add_option("config", config_path, "Path to the run config (.ini)")->required();

  std::string gd_env = "point_maze", gd_out;
  int gd_n = 10;
  double gd_sigma = 0.0;
  std::uint64_t gd_seed = 1;
  auto* gen = app.add_subcommand("gen-demos", "Generate scripted demonstrations (.tds)");
  gen->add_option("--env", gd_env, "Environment name (point_maze | reach_box)");
  gen->add_option("--n", gd_n, "Number of successful trajectories")->required();
  gen->add_option("--sigma", gd_sigma, "Gaussian action-noise scale");
  gen->add_option("--seed", gd_seed, "Random seed");
  gen->add_option("out", gd_out, "Output dataset path")->required();

  std::string ev_dir;
  int ev_episodes = 50;
  std::uint64_t ev_seed = 1;
  auto* ev = app.add_subcommand("eval", "Evaluate a saved checkpoint directory");
  ev->add_option("dir", ev_dir, "Checkpoint directory (config.ini + .ckpt files)")->required();
  ev->add_option("--episodes", ev_episodes, "Evaluation episodes");
  ev->add_option("--seed", ev_seed, "Random seed");

  std::vector<std::string> pl_csvs;
  std::string pl_out;
  auto* pl = app.add_subcommand("plot", "Render learning curves (SVG) from metrics CSVs");
  pl->add_option("csvs", pl_csvs, "metrics.csv files")->required()->expected(-1);
  pl->add_option("--out,-o", pl_out, "Output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : expo::kExitBadConfig;
  }

  if (train->parsed()) return expo::cmd_train(config_path);
  if (gen->parsed()) return expo::cmd_gen_demos(gd_env, gd_n, gd_sigma, gd_out, gd_seed);
  if (ev->parsed()) return expo::cmd_eval(ev_dir, ev_episodes, ev_seed);
  if (pl->parsed()) {
    std::vector<std::filesystem::path> paths(pl_csvs.begin(), pl_csvs.end());
    return expo::cmd_plot(paths, pl_out);
  }
  return expo::kExitBadConfig;
}
