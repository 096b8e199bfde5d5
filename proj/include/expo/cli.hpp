#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace expo {

// Process exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;        // unexpected I/O or internal error
inline constexpr int kExitBadConfig = 2;      // invalid config file or arguments
inline constexpr int kExitDatasetMissing = 3; // dataset absent or unusable
inline constexpr int kExitPlannerFailure = 4; // demo generation could not succeed
inline constexpr int kExitBadCheckpoint = 5;  // checkpoint missing or corrupt
inline constexpr int kExitBadSchema = 6;      // metrics CSV schema mismatch

// Full training run driven by a config file: optional dataset seeding,
// pretraining and warm start, then the online loop. Writes metrics.csv,
// config.ini, and final/ checkpoints into the configured output directory.
int cmd_train(const std::filesystem::path& config_path);

// Scripted demonstrations with action noise sigma, saved as a .tds dataset.
int cmd_gen_demos(const std::string& env_name, int n_traj, double sigma,
                  const std::filesystem::path& out_path, std::uint64_t seed);

// Loads the agent saved in checkpoint_dir (expects config.ini beside the
// .ckpt files), runs evaluation episodes, prints one summary line, and
// writes eval.csv into the directory.
int cmd_eval(const std::filesystem::path& checkpoint_dir, int n_episodes, std::uint64_t seed);

// Learning-curve SVG from one or more metrics.csv files; runs with matching
// sibling configs (ignoring seed/out_dir) are averaged with a min-max band.
int cmd_plot(const std::vector<std::filesystem::path>& csv_paths,
             const std::filesystem::path& out_path);

}  // namespace expo
