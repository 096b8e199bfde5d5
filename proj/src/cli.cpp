#include "expo/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include "expo/agent.hpp"
#include "expo/config.hpp"
#include "expo/demos.hpp"
#include "expo/env.hpp"
#include "expo/errors.hpp"
#include "expo/metrics.hpp"
#include "expo/plot.hpp"

namespace expo {

namespace {

// Evaluation draws come from a dedicated stream so the training trajectory
// is identical no matter how often evaluation runs.
constexpr std::uint64_t kEvalStreamSalt = 0x45564152ULL;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw IoError("failed writing: " + path.string());
}

int fail(int code, const std::string& what) {
  std::cerr << "error: " << what << "\n";
  return code;
}

}  // namespace

int cmd_train(const std::filesystem::path& config_path) {
  RunConfig rc;
  try {
    rc = load_run_config(config_path);
  } catch (const std::exception& e) {
    return fail(kExitBadConfig, e.what());
  }

  try {
    std::unique_ptr<Env> env = make_env(rc.env_name);
    std::unique_ptr<Env> eval_env = make_env(rc.env_name);
    AgentConfig ac = rc.agent;
    ac.state_dim = env->state_dim();
    ac.action_dim = env->action_dim();

    Rng rng(rc.seed);
    ExpoAgent agent(ac, rng);

    if (!rc.dataset.empty()) {
      int sd = 0, ad = 0;
      std::vector<Transition> data;
      try {
        data = load_dataset(rc.dataset, sd, ad);
      } catch (const IoError& e) {
        return fail(kExitDatasetMissing, e.what());
      }
      if (sd != ac.state_dim || ad != ac.action_dim || data.empty())
        return fail(kExitDatasetMissing,
                    "dataset " + rc.dataset + " does not fit environment " + rc.env_name);
      agent.seed_buffer(data);
      std::printf("seeded %zu offline transitions from %s\n", data.size(), rc.dataset.c_str());
    }

    if (ac.pretrain_steps > 0) {
      std::vector<double> trace = agent.pretrain(ac.pretrain_steps, rng);
      if (!trace.empty())
        std::printf("pretrain %d steps, imitation loss %.4f -> %.4f\n", ac.pretrain_steps,
                    trace.front(), trace.back());
    }
    if (rc.warm_start > 0) {
      agent.warm_start(*env, rc.warm_start, rng);
      std::printf("warm start collected %d transitions\n", rc.warm_start);
    }

    std::filesystem::create_directories(rc.out_dir);
    const std::filesystem::path out_dir(rc.out_dir);
    write_text(out_dir / "config.ini", dump_run_config(rc));

    std::ofstream csv(out_dir / "metrics.csv", std::ios::binary | std::ios::trunc);
    if (!csv) throw IoError("cannot open metrics file in " + rc.out_dir);
    csv << kMetricsHeader << "\n";

    Rng eval_rng(rc.seed ^ kEvalStreamSalt);
    const auto t0 = std::chrono::steady_clock::now();
    auto emit = [&](long step, double mean_q, double win_frac) {
      double success = agent.evaluate(*eval_env, rc.eval_episodes, eval_rng);
      MetricsRow row;
      row.env_step = step;
      row.success = success;
      row.mean_q_selected = mean_q;
      row.alpha = agent.edit().alpha();
      row.edited_win_frac = win_frac;
      row.wall_clock =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      csv << format_metrics_row(row) << "\n";
      csv.flush();
      std::printf("step %ld  success %.3f  q_sel %.3f  alpha %.3f  edited %.2f\n", step, success,
                  mean_q, row.alpha, win_frac);
      std::fflush(stdout);
    };

    emit(0, 0.0, 0.0);
    double q_acc = 0.0, frac_acc = 0.0;
    long acc_n = 0;
    for (long i = 1; i <= rc.total_steps; ++i) {
      StepMetrics m = agent.train_step(*env, rng);
      q_acc += m.mean_q_selected;
      frac_acc += m.edited_win_frac;
      ++acc_n;
      if (i % rc.eval_every == 0) {
        emit(i, q_acc / acc_n, frac_acc / acc_n);
        q_acc = frac_acc = 0.0;
        acc_n = 0;
      }
    }

    agent.save(out_dir / "final");
    write_text(out_dir / "final" / "config.ini", dump_run_config(rc));
    std::printf("run complete: %s\n", (out_dir / "metrics.csv").string().c_str());
    return kExitOk;
  } catch (const ConfigError& e) {
    return fail(kExitBadConfig, e.what());
  } catch (const UsageError& e) {
    return fail(kExitBadConfig, e.what());
  } catch (const std::exception& e) {
    return fail(kExitFailure, e.what());
  }
}

int cmd_gen_demos(const std::string& env_name, int n_traj, double sigma,
                  const std::filesystem::path& out_path, std::uint64_t seed) {
  try {
    std::unique_ptr<Env> env = make_env(env_name);
    Demonstrator demo(*env, sigma);
    Rng rng(seed);
    std::vector<Transition> data = generate_demos(*env, demo, n_traj, rng);
    if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
    save_dataset(out_path, data, env->state_dim(), env->action_dim());
    std::printf("wrote %d trajectories (%zu transitions) to %s\n", n_traj, data.size(),
                out_path.string().c_str());
    return kExitOk;
  } catch (const GenerationError& e) {
    return fail(kExitPlannerFailure, e.what());
  } catch (const ConfigError& e) {
    return fail(kExitBadConfig, e.what());
  } catch (const UsageError& e) {
    return fail(kExitBadConfig, e.what());
  } catch (const std::exception& e) {
    return fail(kExitFailure, e.what());
  }
}

int cmd_eval(const std::filesystem::path& checkpoint_dir, int n_episodes, std::uint64_t seed) {
  try {
    RunConfig rc = load_run_config(checkpoint_dir / "config.ini", /*apply_env_override=*/false);
    std::unique_ptr<Env> env = make_env(rc.env_name);
    AgentConfig ac = rc.agent;
    ac.state_dim = env->state_dim();
    ac.action_dim = env->action_dim();
    Rng rng(seed);
    ExpoAgent agent(ac, rng);
    agent.load(checkpoint_dir);

    Rng eval_rng(seed ^ kEvalStreamSalt);
    const auto t0 = std::chrono::steady_clock::now();
    double success = agent.evaluate(*env, n_episodes, eval_rng);
    MetricsRow row;
    row.env_step = 0;
    row.success = success;
    row.alpha = agent.edit().alpha();
    row.wall_clock =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_text(checkpoint_dir / "eval.csv",
               std::string(kMetricsHeader) + "\n" + format_metrics_row(row) + "\n");
    std::printf("success %.9g over %d episodes (%s)\n", success, n_episodes,
                checkpoint_dir.string().c_str());
    return kExitOk;
  } catch (const IoError& e) {
    return fail(kExitBadCheckpoint, e.what());
  } catch (const ConfigError& e) {
    return fail(kExitBadConfig, e.what());
  } catch (const UsageError& e) {
    return fail(kExitBadConfig, e.what());
  } catch (const std::exception& e) {
    return fail(kExitFailure, e.what());
  }
}

int cmd_plot(const std::vector<std::filesystem::path>& csv_paths,
             const std::filesystem::path& out_path) {
  std::vector<CurveGroup> groups;
  try {
    groups = group_metrics_files(csv_paths);
  } catch (const SchemaError& e) {
    return fail(kExitBadSchema, e.what());
  } catch (const IoError& e) {
    return fail(kExitBadSchema, e.what());  // unreadable input counts as schema failure
  } catch (const ConfigError& e) {
    return fail(kExitBadConfig, e.what());
  } catch (const UsageError& e) {
    return fail(kExitBadConfig, e.what());
  }
  try {
    std::string svg = render_curves_svg(groups);
    if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
    write_text(out_path, svg);
    std::printf("wrote %s\n", out_path.string().c_str());
    return kExitOk;
  } catch (const std::exception& e) {
    return fail(kExitFailure, e.what());
  }
}

}  // namespace expo
