#include "wadmm/solve_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace wadmm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& v, int line, const std::string& key) {
  if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    fail(line, "value '" + v + "' for key '" + key + "' is not a number");
  }
}

int parse_int(const std::string& v, int line, const std::string& key) {
  try {
    size_t pos = 0;
    const int i = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return i;
  } catch (...) {
    fail(line, "value '" + v + "' for key '" + key + "' is not an integer");
  }
}

bool parse_bool(const std::string& v, int line, const std::string& key) {
  if (v == "true") return true;
  if (v == "false") return false;
  fail(line, "value '" + v + "' for key '" + key + "' is not true/false");
}

double parse_positive(const std::string& v, int line, const std::string& key) {
  const double d = parse_double(v, line, key);
  if (!(d > 0.0)) fail(line, "key '" + key + "' must be positive");
  return d;
}

}  // namespace

void SolveConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("config: " + msg);
  };
  require(!(preset.empty() && (pde.empty() || split.empty())),
          "missing required key: give 'preset' or both 'pde' and 'split'");
  require(preset.empty() || (pde.empty() && split.empty()),
          "'preset' and explicit 'pde'/'split' are mutually exclusive");
  require(grid.lo.size() == grid.hi.size() && grid.lo.size() == grid.counts.size() &&
              !grid.lo.empty(),
          "grid lo/hi/counts must have matching nonzero lengths");
  for (size_t a = 0; a < grid.lo.size(); ++a) {
    require(grid.lo[a] < grid.hi[a], "grid axis has lo >= hi");
    require(grid.counts[a] >= 2, "grid counts must be >= 2");
  }
  require(alpha > 0 && tau > 0 && epsilon > 0 && beta > 0 && h > 0,
          "alpha, tau, epsilon, beta, h must be positive");
  require(inner_iters >= 1, "inner_iters must be >= 1");
  require(max_outer_iters >= 0, "max_outer_iters must be >= 0");
  require(consensus_tol > 0, "consensus_tol must be positive (or inf)");
  require(snapshot_every >= 1, "snapshot_every must be >= 1");
  require(threads >= 1, "threads must be >= 1");
  require(prox_delta > 0 && prox_sweeps >= 1, "prox_delta/prox_sweeps out of range");
  require(newton_tol > 0 && max_newton >= 1, "newton_tol/max_newton out of range");
  require(backtrack_alpha > 0 && backtrack_alpha < 0.5, "backtrack_alpha must be in (0, 0.5)");
  require(backtrack_beta > 0 && backtrack_beta < 1, "backtrack_beta must be in (0, 1)");
  require(consensus_objective == "mean" || consensus_objective == "zeta",
          "consensus_objective must be 'mean' or 'zeta'");
  require(!output_dir.empty(), "output directory must not be empty");
}

SolveConfig parse_config_text(const std::string& text, const SolveConfig& base) {
  SolveConfig cfg = base;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  bool beta_explicit = false;

  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const auto comment = s.find('#');
    if (comment != std::string::npos) s = s.substr(0, comment);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "malformed section header '" + s + "'");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "experiment" && section != "grid" && section != "solver" &&
          section != "output")
        fail(line, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value', got '" + s + "'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty() || value.empty()) fail(line, "empty key or value");
    if (section.empty()) fail(line, "key '" + key + "' appears before any [section]");

    if (section == "experiment") {
      if (key == "preset") cfg.preset = value;
      else if (key == "pde") cfg.pde = value;
      else if (key == "split") {
        cfg.split.clear();
        for (const auto& group : split_on(value, ','))
          cfg.split.push_back(split_on(group, '+'));
        if (cfg.split.empty()) fail(line, "empty split");
      } else if (key == "alpha") cfg.alpha = parse_positive(value, line, key);
      else if (key == "tau") cfg.tau = parse_positive(value, line, key);
      else if (key == "epsilon") cfg.epsilon = parse_positive(value, line, key);
      else if (key == "beta") { cfg.beta = parse_positive(value, line, key); beta_explicit = true; }
      else if (key == "h") cfg.h = parse_positive(value, line, key);
      else fail(line, "unknown key '" + key + "' in section [experiment]");
    } else if (section == "grid") {
      if (key == "lo" || key == "hi") {
        std::vector<double> vals;
        for (const auto& tok : split_on(value, ' '))
          vals.push_back(parse_double(tok, line, key));
        if (vals.empty()) fail(line, "empty grid bounds");
        (key == "lo" ? cfg.grid.lo : cfg.grid.hi) = vals;
      } else if (key == "counts") {
        std::vector<int> vals;
        for (const auto& tok : split_on(value, ' ')) {
          const int c = parse_int(tok, line, key);
          if (c < 2) fail(line, "grid counts must be >= 2");
          vals.push_back(c);
        }
        if (vals.empty()) fail(line, "empty grid counts");
        cfg.grid.counts = vals;
      } else fail(line, "unknown key '" + key + "' in section [grid]");
    } else if (section == "solver") {
      if (key == "inner_iters") {
        cfg.inner_iters = parse_int(value, line, key);
        if (cfg.inner_iters < 1) fail(line, "inner_iters must be >= 1");
      } else if (key == "max_outer_iters") {
        cfg.max_outer_iters = parse_int(value, line, key);
        if (cfg.max_outer_iters < 0) fail(line, "max_outer_iters must be >= 0");
      } else if (key == "consensus_tol") cfg.consensus_tol = parse_positive(value, line, key);
      else if (key == "snapshot_every") {
        cfg.snapshot_every = parse_int(value, line, key);
        if (cfg.snapshot_every < 1) fail(line, "snapshot_every must be >= 1");
      } else if (key == "threads") {
        cfg.threads = parse_int(value, line, key);
        if (cfg.threads < 1) fail(line, "threads must be >= 1");
      } else if (key == "warm_start") cfg.warm_start = parse_bool(value, line, key);
      else if (key == "kernel_mode") {
        if (value == "direct") cfg.kernel_mode = KernelMode::Direct;
        else if (value == "log_domain") cfg.kernel_mode = KernelMode::LogDomain;
        else fail(line, "kernel_mode must be 'direct' or 'log_domain'");
      } else if (key == "prox_delta") cfg.prox_delta = parse_positive(value, line, key);
      else if (key == "prox_sweeps") {
        cfg.prox_sweeps = parse_int(value, line, key);
        if (cfg.prox_sweeps < 1) fail(line, "prox_sweeps must be >= 1");
      } else if (key == "newton_tol") cfg.newton_tol = parse_positive(value, line, key);
      else if (key == "max_newton") {
        cfg.max_newton = parse_int(value, line, key);
        if (cfg.max_newton < 1) fail(line, "max_newton must be >= 1");
      } else if (key == "backtrack_alpha") cfg.backtrack_alpha = parse_positive(value, line, key);
      else if (key == "backtrack_beta") cfg.backtrack_beta = parse_positive(value, line, key);
      else if (key == "consensus_objective") cfg.consensus_objective = value;
      else fail(line, "unknown key '" + key + "' in section [solver]");
    } else {  // output
      if (key == "directory") cfg.output_dir = value;
      else fail(line, "unknown key '" + key + "' in section [output]");
    }
  }

  // The aggregation presets default to the centralized-comparison temperature
  // unless beta was given explicitly.
  if (cfg.preset.rfind("aggregation", 0) == 0 && !beta_explicit && base.beta == cfg.beta)
    cfg.beta = 1.0 / 0.0520;

  cfg.validate();
  return cfg;
}

SolveConfig parse_config(const std::string& path, const SolveConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), base);
}

std::string render_config(const SolveConfig& c) {
  std::ostringstream os;
  os << "[experiment]\n";
  if (!c.preset.empty()) os << "preset = " << c.preset << "\n";
  if (!c.pde.empty()) os << "pde = " << c.pde << "\n";
  if (!c.split.empty()) {
    os << "split = ";
    for (size_t g = 0; g < c.split.size(); ++g) {
      if (g) os << ", ";
      for (size_t o = 0; o < c.split[g].size(); ++o) {
        if (o) os << "+";
        os << c.split[g][o];
      }
    }
    os << "\n";
  }
  os << "alpha = " << format_double(c.alpha) << "\n";
  os << "tau = " << format_double(c.tau) << "\n";
  os << "epsilon = " << format_double(c.epsilon) << "\n";
  os << "beta = " << format_double(c.beta) << "\n";
  os << "h = " << format_double(c.h) << "\n";
  os << "\n[grid]\n";
  auto write_axis = [&os](const char* key, const std::vector<double>& v) {
    os << key << " =";
    for (double x : v) os << ' ' << format_double(x);
    os << "\n";
  };
  write_axis("lo", c.grid.lo);
  write_axis("hi", c.grid.hi);
  os << "counts =";
  for (int x : c.grid.counts) os << ' ' << x;
  os << "\n";
  os << "\n[solver]\n";
  os << "inner_iters = " << c.inner_iters << "\n";
  os << "max_outer_iters = " << c.max_outer_iters << "\n";
  os << "consensus_tol = "
     << (std::isinf(c.consensus_tol) ? "inf" : format_double(c.consensus_tol)) << "\n";
  os << "snapshot_every = " << c.snapshot_every << "\n";
  os << "threads = " << c.threads << "\n";
  os << "warm_start = " << (c.warm_start ? "true" : "false") << "\n";
  os << "kernel_mode = "
     << (c.kernel_mode == KernelMode::Direct ? "direct" : "log_domain") << "\n";
  os << "prox_delta = " << format_double(c.prox_delta) << "\n";
  os << "prox_sweeps = " << c.prox_sweeps << "\n";
  os << "newton_tol = " << format_double(c.newton_tol) << "\n";
  os << "max_newton = " << c.max_newton << "\n";
  os << "backtrack_alpha = " << format_double(c.backtrack_alpha) << "\n";
  os << "backtrack_beta = " << format_double(c.backtrack_beta) << "\n";
  os << "consensus_objective = " << c.consensus_objective << "\n";
  os << "\n[output]\n";
  os << "directory = " << c.output_dir << "\n";
  return os.str();
}

}  // namespace wadmm
