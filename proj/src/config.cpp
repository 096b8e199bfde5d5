#include "expo/config.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "expo/env.hpp"
#include "expo/errors.hpp"

namespace expo {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& v, int line) {
  if (v.empty()) fail(line, "empty numeric value");
  errno = 0;
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (errno != 0 || end != v.c_str() + v.size()) fail(line, "bad number '" + v + "'");
  return x;
}

long long parse_int(const std::string& v, int line) {
  if (v.empty()) fail(line, "empty integer value");
  errno = 0;
  char* end = nullptr;
  long long x = std::strtoll(v.c_str(), &end, 10);
  if (errno != 0 || end != v.c_str() + v.size()) fail(line, "bad integer '" + v + "'");
  return x;
}

std::uint64_t parse_u64(const std::string& v, int line) {
  if (v.empty() || v[0] == '-') fail(line, "bad unsigned integer '" + v + "'");
  errno = 0;
  char* end = nullptr;
  unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (errno != 0 || end != v.c_str() + v.size()) fail(line, "bad unsigned integer '" + v + "'");
  return x;
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true") return true;
  if (v == "false") return false;
  fail(line, "bad boolean '" + v + "' (use true or false)");
}

int parse_bounded_int(const std::string& v, int line) {
  long long x = parse_int(v, line);
  if (x < -(1LL << 30) || x > (1LL << 30)) fail(line, "integer out of range '" + v + "'");
  return static_cast<int>(x);
}

// Assigns one key; returns false when the (section, key) pair is unknown.
bool apply_kv(RunConfig& c, const std::string& sec, const std::string& key,
              const std::string& val, int line) {
  AgentConfig& a = c.agent;
  if (sec == "env") {
    if (key == "name") { c.env_name = val; return true; }
    return false;
  }
  if (sec == "agent") {
    if (key == "hidden") { a.hidden = parse_bounded_int(val, line); return true; }
    if (key == "base_blocks") { a.base_blocks = parse_bounded_int(val, line); return true; }
    if (key == "edit_layers") { a.edit_layers = parse_bounded_int(val, line); return true; }
    if (key == "critic_layers") { a.critic_layers = parse_bounded_int(val, line); return true; }
    if (key == "T") { a.T = parse_bounded_int(val, line); return true; }
    if (key == "lr") { a.lr = parse_double(val, line); return true; }
    if (key == "batch") { a.batch = parse_bounded_int(val, line); return true; }
    if (key == "gamma") { a.gamma = parse_double(val, line); return true; }
    if (key == "tau") { a.tau = parse_double(val, line); return true; }
    if (key == "K") { a.K = parse_bounded_int(val, line); return true; }
    if (key == "M") { a.M = parse_bounded_int(val, line); return true; }
    if (key == "N") { a.N = parse_bounded_int(val, line); return true; }
    if (key == "G") { a.G = parse_bounded_int(val, line); return true; }
    if (key == "beta") { a.beta = parse_double(val, line); return true; }
    if (key == "dropout") { a.dropout = parse_double(val, line); return true; }
    if (key == "alpha_init") { a.alpha_init = parse_double(val, line); return true; }
    if (key == "buffer_capacity") {
      long long x = parse_int(val, line);
      if (x < 1) fail(line, "buffer_capacity must be >= 1");
      a.buffer_capacity = static_cast<std::size_t>(x);
      return true;
    }
    if (key == "pretrain_steps") { a.pretrain_steps = parse_bounded_int(val, line); return true; }
    if (key == "symmetric_sampling") { a.symmetric_sampling = parse_bool(val, line); return true; }
    if (key == "rollout_q_target") { a.rollout_q_target = parse_bool(val, line); return true; }
    return false;
  }
  if (sec == "run") {
    if (key == "seed") { c.seed = parse_u64(val, line); return true; }
    if (key == "mode") { a.mode = parse_mode(val); return true; }
    if (key == "variant") { a.variant = parse_variant(val); return true; }
    if (key == "dataset") { c.dataset = val; return true; }
    if (key == "out_dir") { c.out_dir = val; return true; }
    if (key == "total_steps") { c.total_steps = parse_int(val, line); return true; }
    if (key == "eval_every") { c.eval_every = parse_int(val, line); return true; }
    if (key == "eval_episodes") { c.eval_episodes = parse_bounded_int(val, line); return true; }
    if (key == "warm_start") { c.warm_start = parse_bounded_int(val, line); return true; }
    return false;
  }
  return false;
}

void validate_run(const RunConfig& c) {
  make_env(c.env_name);  // rejects unknown environments
  AgentConfig probe = c.agent;
  probe.state_dim = 1;  // real dimensions come from the environment later
  probe.action_dim = 1;
  validate_agent_config(probe);
  if (c.total_steps < 0) throw ConfigError("total_steps must be >= 0");
  if (c.eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (c.eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1");
  if (c.warm_start < 0) throw ConfigError("warm_start must be >= 0");
  if (c.out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

// Shortest decimal form that parses back to exactly the same double.
std::string fmt_double(double x) {
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

}  // namespace

RunConfig parse_run_config(const std::string& text, bool apply_env_override) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw, section;
  int line_no = 0;
  std::vector<std::string> seen;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "env" && section != "agent" && section != "run")
        fail(line_no, "unknown section [" + section + "]");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");
    if (section.empty()) fail(line_no, "key '" + key + "' before any [section]");
    std::string full = section + "." + key;
    for (const std::string& s : seen)
      if (s == full) fail(line_no, "duplicate key '" + full + "'");
    seen.push_back(full);
    if (!apply_kv(cfg, section, key, val, line_no))
      fail(line_no, "unknown key '" + key + "' in section [" + section + "]");
  }

  if (apply_env_override) {
    if (const char* env_seed = std::getenv("EXPO_SEED"); env_seed && *env_seed) {
      std::string v(env_seed);
      errno = 0;
      char* end = nullptr;
      unsigned long long x = std::strtoull(v.c_str(), &end, 10);
      if (v[0] == '-' || errno != 0 || end != v.c_str() + v.size())
        throw ConfigError("EXPO_SEED must be an unsigned integer, got '" + v + "'");
      cfg.seed = x;
    }
  }

  validate_run(cfg);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, bool apply_env_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), apply_env_override);
}

std::string dump_run_config(const RunConfig& c) {
  const AgentConfig& a = c.agent;
  std::ostringstream o;
  o << "[env]\n";
  o << "name = " << c.env_name << "\n";
  o << "\n[agent]\n";
  o << "hidden = " << a.hidden << "\n";
  o << "base_blocks = " << a.base_blocks << "\n";
  o << "edit_layers = " << a.edit_layers << "\n";
  o << "critic_layers = " << a.critic_layers << "\n";
  o << "T = " << a.T << "\n";
  o << "lr = " << fmt_double(a.lr) << "\n";
  o << "batch = " << a.batch << "\n";
  o << "gamma = " << fmt_double(a.gamma) << "\n";
  o << "tau = " << fmt_double(a.tau) << "\n";
  o << "K = " << a.K << "\n";
  o << "M = " << a.M << "\n";
  o << "N = " << a.N << "\n";
  o << "G = " << a.G << "\n";
  o << "beta = " << fmt_double(a.beta) << "\n";
  o << "dropout = " << fmt_double(a.dropout) << "\n";
  o << "alpha_init = " << fmt_double(a.alpha_init) << "\n";
  o << "buffer_capacity = " << a.buffer_capacity << "\n";
  o << "pretrain_steps = " << a.pretrain_steps << "\n";
  o << "symmetric_sampling = " << (a.symmetric_sampling ? "true" : "false") << "\n";
  o << "rollout_q_target = " << (a.rollout_q_target ? "true" : "false") << "\n";
  o << "\n[run]\n";
  o << "seed = " << c.seed << "\n";
  o << "mode = " << mode_name(a.mode) << "\n";
  o << "variant = " << variant_name(a.variant) << "\n";
  o << "dataset = " << c.dataset << "\n";
  o << "out_dir = " << c.out_dir << "\n";
  o << "total_steps = " << c.total_steps << "\n";
  o << "eval_every = " << c.eval_every << "\n";
  o << "eval_episodes = " << c.eval_episodes << "\n";
  o << "warm_start = " << c.warm_start << "\n";
  return o.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
  std::istringstream in(dump_run_config(cfg));
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a offset basis
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("seed = ", 0) == 0 || line.rfind("out_dir = ", 0) == 0) continue;
    for (char ch : line) {
      h ^= static_cast<unsigned char>(ch);
      h *= 1099511628211ULL;
    }
    h ^= '\n';
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace expo
