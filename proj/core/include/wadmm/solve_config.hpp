#pragma once

#include <limits>
#include <string>
#include <vector>

#include "wadmm/measures.hpp"

namespace wadmm {

struct GridSpec {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<int> counts;
};

// Fully resolved run configuration. Defaults are the paper's Fokker-Planck
// parameter set; presets and config files override them.
struct SolveConfig {
  // experiment selection: either a named preset, or pde + explicit split
  std::string preset;                          // "fpk", "aggregation-case1".."aggregation-case4"
  std::string pde;                             // "fpk" | "aggregation" (with explicit split)
  std::vector<std::vector<std::string>> split; // operator groups, e.g. {{"advection"},{"log_diffusion"}}

  GridSpec grid{{ -2.0, -2.0 }, { 2.0, 2.0 }, { 41, 41 }};

  double alpha = 12.0;
  double tau = 150.0;
  double epsilon = 5e-2;
  double beta = 1.0;
  double h = 5e-3;  // singular-cell half width for aggregation potentials

  int inner_iters = 3;
  int max_outer_iters = 5000;
  double consensus_tol = std::numeric_limits<double>::infinity();
  int snapshot_every = 100;
  int threads = 1;
  bool warm_start = true;
  KernelMode kernel_mode = KernelMode::Direct;

  double prox_delta = 1e-4;
  int prox_sweeps = 20;
  double newton_tol = 1e-4;
  int max_newton = 50;
  double backtrack_alpha = 0.3;
  double backtrack_beta = 0.7;
  std::string consensus_objective = "mean";  // "mean" | "zeta"

  std::string output_dir = "out";

  void validate() const;
};

// Thrown for malformed or out-of-range configuration input; carries
// line/field context. The CLI maps it to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Line-oriented `key = value` format with [section] headers. Unknown sections
// or keys are rejected with their line number.
SolveConfig parse_config_text(const std::string& text, const SolveConfig& base = {});
SolveConfig parse_config(const std::string& path, const SolveConfig& base = {});

// Serializes a resolved config in the same format parse_config accepts, so a
// run's manifest can be replayed verbatim.
std::string render_config(const SolveConfig& config);

}  // namespace wadmm
