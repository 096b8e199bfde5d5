#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "expo/cli.hpp"
#include "expo/config.hpp"
#include "expo/errors.hpp"
#include "expo/metrics.hpp"
#include "expo/plot.hpp"
#include "expo/replay.hpp"

using namespace expo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const char* tag) {
    path = fs::temp_directory_path() /
           (std::string("expo_cli_") + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct EnvVarGuard {
  std::string name;
  explicit EnvVarGuard(const char* n) : name(n) { ::unsetenv(n); }
  void set(const char* v) { ::setenv(name.c_str(), v, 1); }
  ~EnvVarGuard() { ::unsetenv(name.c_str()); }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  REQUIRE(out.good());
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Drops the wall_clock column so deterministic reruns compare equal.
std::string strip_wall_clock(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) out << line.substr(0, line.rfind(',')) << "\n";
  return out.str();
}

// Small-but-real training config for command-level tests.
std::string tiny_config(const fs::path& dataset, const fs::path& out_dir, int total_steps,
                        unsigned seed = 1) {
  std::ostringstream o;
  o << "[env]\nname = point_maze\n\n[agent]\nhidden = 16\nbase_blocks = 1\nedit_layers = 1\n"
       "critic_layers = 1\nT = 2\nbatch = 16\nK = 2\nM = 1\nN = 2\nG = 1\nbeta = 0.3\n\n"
       "[run]\nseed = "
    << seed << "\ndataset = " << dataset.string() << "\nout_dir = " << out_dir.string()
    << "\ntotal_steps = " << total_steps << "\neval_every = 10\neval_episodes = 2\n";
  return o.str();
}

}  // namespace

TEST_CASE("config defaults carry the reference hyperparameters") {
  RunConfig c = parse_run_config("");
  CHECK(c.env_name == "point_maze");
  CHECK(c.agent.hidden == 256);
  CHECK(c.agent.base_blocks == 3);
  CHECK(c.agent.edit_layers == 3);
  CHECK(c.agent.critic_layers == 3);
  CHECK(c.agent.T == 10);
  CHECK(c.agent.lr == 3e-4);
  CHECK(c.agent.batch == 256);
  CHECK(c.agent.gamma == 0.99);
  CHECK(c.agent.tau == 0.005);
  CHECK(c.agent.K == 10);
  CHECK(c.agent.M == 2);
  CHECK(c.agent.N == 8);
  CHECK(c.agent.G == 20);
  CHECK(c.agent.dropout == 0.0);
  CHECK(c.agent.pretrain_steps == 0);
  CHECK(c.agent.mode == RunMode::online);
  CHECK(c.agent.variant == AblationVariant::full);
  CHECK(c.seed == 1);
  CHECK(c.eval_every == 2500);
  CHECK(c.eval_episodes == 50);
  CHECK(c.total_steps == 50000);
}

TEST_CASE("config parsing is fail-closed") {
  CHECK_THROWS_AS(parse_run_config("[agent]\nhiddenn = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[nets]\nhidden = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("hidden = 3\n"), ConfigError);  // key before section
  CHECK_THROWS_AS(parse_run_config("[agent\nhidden = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[agent]\nhidden\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[agent]\nhidden = 3\nhidden = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[agent]\nhidden = 3x\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[agent]\nlr = fast\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[agent]\nsymmetric_sampling = yes\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[run]\nseed = -4\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[run]\nmode = offline\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[run]\nvariant = edit_only\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[env]\nname = cartpole\n"), ConfigError);

  // Range checks fire at load, not only at agent construction.
  CHECK_THROWS_AS(parse_run_config("[agent]\ngamma = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[agent]\ntau = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[agent]\nK = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[agent]\nM = 11\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[run]\ntotal_steps = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[run]\neval_every = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[run]\neval_episodes = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[run]\nwarm_start = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[run]\nout_dir =\n"), ConfigError);

  // Comments, blank lines, and spacing are accepted.
  RunConfig c = parse_run_config(
      "# leading comment\n\n[agent]\n  N   =  3 \n; another comment\n[run]\nseed = 9\n");
  CHECK(c.agent.N == 3);
  CHECK(c.seed == 9);
}

TEST_CASE("config dump round-trips exactly") {
  RunConfig c;
  c.env_name = "reach_box";
  c.agent.hidden = 48;
  c.agent.base_blocks = 2;
  c.agent.edit_layers = 2;
  c.agent.critic_layers = 1;
  c.agent.T = 5;
  c.agent.lr = 1.5e-4;
  c.agent.batch = 64;
  c.agent.gamma = 0.97;
  c.agent.tau = 0.01;
  c.agent.K = 5;
  c.agent.M = 3;
  c.agent.N = 6;
  c.agent.G = 4;
  c.agent.beta = 0.05;
  c.agent.dropout = 0.1;
  c.agent.alpha_init = 0.5;
  c.agent.buffer_capacity = 123456;
  c.agent.pretrain_steps = 777;
  c.agent.symmetric_sampling = true;
  c.agent.rollout_q_target = true;
  c.agent.mode = RunMode::offline_to_online;
  c.agent.variant = AblationVariant::sample_backup;
  c.seed = 424242;
  c.dataset = "data/box.tds";
  c.out_dir = "runs/exp9";
  c.total_steps = 12345;
  c.eval_every = 617;
  c.eval_episodes = 7;
  c.warm_start = 99;

  std::string dumped = dump_run_config(c);
  RunConfig back = parse_run_config(dumped, /*apply_env_override=*/false);
  CHECK(dump_run_config(back) == dumped);
  CHECK(back.agent.lr == c.agent.lr);
  CHECK(back.agent.beta == c.agent.beta);
  CHECK(back.seed == c.seed);
  CHECK(back.agent.variant == c.agent.variant);
  CHECK(back.agent.mode == c.agent.mode);

  // Defaults round-trip too.
  std::string d0 = dump_run_config(RunConfig{});
  CHECK(dump_run_config(parse_run_config(d0, false)) == d0);
}

TEST_CASE("EXPO_SEED overrides the configured seed") {
  EnvVarGuard guard("EXPO_SEED");
  CHECK(parse_run_config("[run]\nseed = 5\n").seed == 5);
  guard.set("12345");
  CHECK(parse_run_config("[run]\nseed = 5\n").seed == 12345);
  CHECK(parse_run_config("[run]\nseed = 5\n", /*apply_env_override=*/false).seed == 5);
  guard.set("not_a_number");
  CHECK_THROWS_AS(parse_run_config("[run]\nseed = 5\n"), ConfigError);
  guard.set("-3");
  CHECK_THROWS_AS(parse_run_config("[run]\nseed = 5\n"), ConfigError);
}

TEST_CASE("config hash groups seed sweeps and separates real changes") {
  RunConfig a, b;
  b.seed = 999;
  b.out_dir = "elsewhere";
  CHECK(config_hash(a) == config_hash(b));  // seed and out_dir never split groups

  RunConfig c;
  c.agent.beta = 0.41;
  CHECK(config_hash(a) != config_hash(c));
  RunConfig d;
  d.agent.variant = AblationVariant::no_edit;
  CHECK(config_hash(a) != config_hash(d));
  RunConfig e;
  e.dataset = "other.tds";
  CHECK(config_hash(a) != config_hash(e));
}

TEST_CASE("metrics rows format with stable precision") {
  MetricsRow r;
  r.env_step = 2500;
  r.success = 0.84;
  r.mean_q_selected = 1.23456789012;
  r.alpha = 0.05;
  r.edited_win_frac = 0.5;
  r.wall_clock = 12.25;
  CHECK(format_metrics_row(r) == "2500,0.84,1.23456789,0.05,0.5,12.25");
}

TEST_CASE("metrics CSVs round-trip and are validated on read") {
  TempDir dir("metrics");
  const fs::path p = dir.path / "m.csv";

  std::ostringstream o;
  o << kMetricsHeader << "\n";
  MetricsRow r1{0, 0.0, 0.1, 1.0, 0.0, 0.5};
  MetricsRow r2{2500, 0.75, 1.5, 0.4, 0.61, 60.25};
  o << format_metrics_row(r1) << "\n" << format_metrics_row(r2) << "\n";
  write_file(p, o.str());

  std::vector<MetricsRow> rows = read_metrics_csv(p);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].env_step == 0);
  CHECK(rows[1].env_step == 2500);
  CHECK(rows[1].success == 0.75);
  CHECK(rows[1].edited_win_frac == 0.61);
  CHECK(rows[1].wall_clock == 60.25);

  write_file(p, "env_step,success\n1,2\n");
  CHECK_THROWS_AS(read_metrics_csv(p), SchemaError);
  write_file(p, std::string(kMetricsHeader) + "\n");
  CHECK_THROWS_AS(read_metrics_csv(p), SchemaError);  // no data rows
  write_file(p, std::string(kMetricsHeader) + "\n1,2,3\n");
  CHECK_THROWS_AS(read_metrics_csv(p), SchemaError);  // wrong field count
  write_file(p, std::string(kMetricsHeader) + "\n1,x,3,4,5,6\n");
  CHECK_THROWS_AS(read_metrics_csv(p), SchemaError);  // non-numeric field
  write_file(p, std::string(kMetricsHeader) + "\n5,0,0,0,0,0\n5,0,0,0,0,0\n");
  CHECK_THROWS_AS(read_metrics_csv(p), SchemaError);  // env_step not increasing
  CHECK_THROWS_AS(read_metrics_csv(dir.path / "ghost.csv"), IoError);
}

TEST_CASE("plot grouping merges seed sweeps and isolates distinct configs") {
  TempDir dir("plot");
  RunConfig base;
  base.agent.beta = 0.3;

  auto make_run = [&](const char* sub, unsigned seed, double final_success,
                      bool with_config) -> fs::path {
    fs::path run_dir = dir.path / sub;
    fs::create_directories(run_dir);
    RunConfig rc = base;
    rc.seed = seed;
    rc.out_dir = run_dir.string();
    if (with_config) write_file(run_dir / "config.ini", dump_run_config(rc));
    std::ostringstream o;
    o << kMetricsHeader << "\n0,0,0,1,0,1\n1000," << final_success * 0.5 << ",0,1,0,2\n2000,"
      << final_success << ",0,1,0,3\n";
    write_file(run_dir / "metrics.csv", o.str());
    return run_dir / "metrics.csv";
  };

  fs::path r1 = make_run("s1", 1, 0.8, true);
  fs::path r2 = make_run("s2", 2, 0.9, true);
  fs::path r3 = make_run("s3", 3, 1.0, true);
  std::vector<CurveGroup> groups = group_metrics_files({r1, r2, r3});
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].runs.size() == 3);
  CHECK(groups[0].label.find("point_maze full #") == 0);

  // A config that differs in substance lands in its own group.
  RunConfig other = base;
  other.agent.variant = AblationVariant::no_edit;
  fs::path run4 = dir.path / "s4";
  fs::create_directories(run4);
  write_file(run4 / "config.ini", dump_run_config(other));
  write_file(run4 / "metrics.csv",
             std::string(kMetricsHeader) + "\n0,0,0,1,0,1\n2000,0.4,0,1,0,2\n");
  groups = group_metrics_files({r1, r2, r3, run4 / "metrics.csv"});
  REQUIRE(groups.size() == 2);

  // Without a sibling config every file is its own singleton group.
  fs::path bare = make_run("bare", 4, 0.7, false);
  groups = group_metrics_files({r1, bare});
  REQUIRE(groups.size() == 2);

  CHECK_THROWS_AS(group_metrics_files({}), UsageError);
}

TEST_CASE("curve rendering draws bands only for multi-run groups") {
  auto run_of = [](double lo, double hi) {
    std::vector<MetricsRow> rows;
    for (int i = 0; i <= 4; ++i) {
      MetricsRow r;
      r.env_step = i * 500;
      r.success = lo + (hi - lo) * i / 4.0;
      rows.push_back(r);
    }
    return rows;
  };

  CurveGroup single{"solo", {run_of(0.0, 1.0)}};
  std::string svg1 = render_curves_svg({single});
  CHECK(svg1.find("<svg") == 0);
  CHECK(svg1.find("<polyline") != std::string::npos);
  CHECK(svg1.find("<polygon") == std::string::npos);  // one run, no band
  CHECK(svg1.find("solo (1 run)") != std::string::npos);

  CurveGroup multi{"sweep", {run_of(0.0, 0.8), run_of(0.1, 1.0), run_of(0.05, 0.9)}};
  std::string svg3 = render_curves_svg({multi});
  CHECK(svg3.find("<polygon") != std::string::npos);
  CHECK(svg3.find("sweep (3 runs)") != std::string::npos);

  CHECK_THROWS_AS(render_curves_svg({}), UsageError);
}

TEST_CASE("gen-demos command writes a reloadable dataset") {
  TempDir dir("gen");
  const fs::path out = dir.path / "demos.tds";
  CHECK(cmd_gen_demos("point_maze", 5, 0.0, out, 3) == kExitOk);
  int sd = 0, ad = 0;
  std::vector<Transition> data = load_dataset(out, sd, ad);
  CHECK(sd == 4);
  CHECK(ad == 2);
  CHECK(data.size() > 5);  // several transitions per trajectory
  int terminals = 0;
  for (const Transition& t : data) terminals += t.done ? 1 : 0;
  CHECK(terminals == 5);  // exactly one success termination per trajectory

  CHECK(cmd_gen_demos("cartpole", 5, 0.0, dir.path / "x.tds", 3) == kExitBadConfig);
  CHECK(cmd_gen_demos("point_maze", 0, 0.0, dir.path / "x.tds", 3) == kExitBadConfig);
  CHECK(cmd_gen_demos("point_maze", -2, 0.0, dir.path / "x.tds", 3) == kExitBadConfig);
  // Noise so large the scripted controller cannot succeed: planner failure.
  CHECK(cmd_gen_demos("point_maze", 1, 50.0, dir.path / "y.tds", 3) == kExitPlannerFailure);
}

TEST_CASE("train command runs end-to-end and is deterministic") {
  TempDir dir("train");
  EnvVarGuard guard("EXPO_SEED");
  const fs::path demos = dir.path / "demos.tds";
  REQUIRE(cmd_gen_demos("point_maze", 5, 0.0, demos, 3) == kExitOk);

  const fs::path cfg1 = dir.path / "run1.ini";
  write_file(cfg1, tiny_config(demos, dir.path / "out1", 20));
  CHECK(cmd_train(cfg1) == kExitOk);
  CHECK(fs::exists(dir.path / "out1" / "config.ini"));
  CHECK(fs::exists(dir.path / "out1" / "final" / "base.ckpt"));
  std::vector<MetricsRow> rows = read_metrics_csv(dir.path / "out1" / "metrics.csv");
  REQUIRE(rows.size() == 3);  // step 0 plus evals at 10 and 20
  CHECK(rows[0].env_step == 0);
  CHECK(rows[1].env_step == 10);
  CHECK(rows[2].env_step == 20);

  // Identical config and seed, fresh output directory: identical metrics
  // modulo the wall-clock column.
  const fs::path cfg2 = dir.path / "run2.ini";
  write_file(cfg2, tiny_config(demos, dir.path / "out2", 20));
  CHECK(cmd_train(cfg2) == kExitOk);
  CHECK(strip_wall_clock(read_file(dir.path / "out1" / "metrics.csv")) ==
        strip_wall_clock(read_file(dir.path / "out2" / "metrics.csv")));

  // total_steps = 0 emits exactly the step-0 evaluation row.
  const fs::path cfg0 = dir.path / "run0.ini";
  write_file(cfg0, tiny_config(demos, dir.path / "out0", 0));
  CHECK(cmd_train(cfg0) == kExitOk);
  rows = read_metrics_csv(dir.path / "out0" / "metrics.csv");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].env_step == 0);

  CHECK(cmd_train(dir.path / "ghost.ini") == kExitBadConfig);
  const fs::path bad = dir.path / "bad.ini";
  write_file(bad, "[agent]\nhiddenn = 3\n");
  CHECK(cmd_train(bad) == kExitBadConfig);
  const fs::path no_data = dir.path / "no_data.ini";
  write_file(no_data, tiny_config(dir.path / "ghost.tds", dir.path / "out3", 20));
  CHECK(cmd_train(no_data) == kExitDatasetMissing);
}

TEST_CASE("eval command reloads checkpoints; plot renders training curves") {
  TempDir dir("evalplot");
  EnvVarGuard guard("EXPO_SEED");
  const fs::path demos = dir.path / "demos.tds";
  REQUIRE(cmd_gen_demos("point_maze", 5, 0.0, demos, 3) == kExitOk);
  const fs::path cfg = dir.path / "run.ini";
  write_file(cfg, tiny_config(demos, dir.path / "out", 20));
  REQUIRE(cmd_train(cfg) == kExitOk);

  const fs::path final_dir = dir.path / "out" / "final";
  CHECK(cmd_eval(final_dir, 3, 7) == kExitOk);
  std::vector<MetricsRow> eval_rows = read_metrics_csv(final_dir / "eval.csv");
  REQUIRE(eval_rows.size() == 1);
  CHECK(eval_rows[0].success >= 0.0);
  CHECK(eval_rows[0].success <= 1.0);

  CHECK(cmd_eval(dir.path / "ghost", 3, 7) == kExitBadCheckpoint);
  // Truncated checkpoint: corrupt payload is rejected.
  write_file(final_dir / "base.ckpt", "XX");
  CHECK(cmd_eval(final_dir, 3, 7) == kExitBadCheckpoint);

  const fs::path svg = dir.path / "curves.svg";
  CHECK(cmd_plot({dir.path / "out" / "metrics.csv"}, svg) == kExitOk);
  std::string content = read_file(svg);
  CHECK(content.find("<svg") == 0);
  CHECK(content.find("evaluation success") != std::string::npos);

  const fs::path junk = dir.path / "junk.csv";
  write_file(junk, "env_step,success\n1,2\n");
  CHECK(cmd_plot({junk}, svg) == kExitBadSchema);
  CHECK(cmd_plot({dir.path / "ghost.csv"}, svg) == kExitBadSchema);
}
