#include "wadmm/pde_flows.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "wadmm/transport.hpp"

namespace wadmm {

namespace {

PdeOperator operator_from_name(const std::string& name) {
  if (name == "advection") return PdeOperator::Advection;
  if (name == "interaction") return PdeOperator::Interaction;
  if (name == "log_diffusion") return PdeOperator::LogDiffusion;
  if (name == "quadratic_diffusion") return PdeOperator::QuadraticDiffusion;
  throw ConfigError("unknown PDE operator '" + name + "'");
}

bool is_diffusion(PdeOperator op) {
  return op == PdeOperator::LogDiffusion || op == PdeOperator::QuadraticDiffusion;
}

}  // namespace

void SplittingSpec::validate(const std::vector<PdeOperator>& pde_operators) const {
  if (groups.empty()) throw ConfigError("splitting: no groups");
  std::multiset<PdeOperator> seen;
  for (const auto& group : groups) {
    if (group.empty()) throw ConfigError("splitting: empty group");
    int diffusion = 0;
    for (PdeOperator op : group) {
      seen.insert(op);
      if (is_diffusion(op)) ++diffusion;
    }
    if (diffusion > 1)
      throw ConfigError("splitting: a group may contain at most one diffusion term");
  }
  std::multiset<PdeOperator> expected(pde_operators.begin(), pde_operators.end());
  if (seen != expected)
    throw ConfigError("splitting: groups must partition exactly the PDE's operators");
}

double fpk_potential(const VectorXd& theta) {
  const double t1 = theta[0], t2 = theta[1];
  return 0.25 * (1.0 + t1 * t1 * t1 * t1) + 0.5 * (t2 * t2 - t1 * t1);
}

double aggregation_drift_potential(const VectorXd& theta) {
  return -0.25 * std::log(theta.norm());
}

double aggregation_interaction_potential(const VectorXd& theta) {
  const double r = theta.norm();
  return 0.5 * r * r - std::log(r);
}

ProbabilityVector initial_mixture(const SampleSet& samples) {
  if (samples.dim() != 2)
    throw std::invalid_argument("initial_mixture: case studies are two-dimensional");
  std::vector<VectorXd> means;
  for (auto [x, y] : {std::pair{1.0, 1.0}, {-1.0, -1.0}, {1.0, -1.0}, {-1.0, 1.0}, {0.0, 0.0}}) {
    VectorXd m(2);
    m << x, y;
    means.push_back(m);
  }
  const MatrixXd cov = 0.1 * MatrixXd::Identity(2, 2);
  const VectorXd weights = VectorXd::Constant(5, 0.2);
  return gaussian_mixture(samples, means, cov, weights);
}

ProbabilityVector gibbs_reference_density(const SampleSet& samples,
                                          const ScalarField& V, double beta, double h) {
  const VectorXd v = discretize_drift(V, samples, h);
  VectorXd density = (-beta * v.array()).exp();
  return ProbabilityVector::normalized(std::move(density));
}

ProbabilityVector annulus_reference_density(const SampleSet& samples,
                                            double r_inner, double r_outer) {
  const int n = samples.size();
  VectorXd density = VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    const double r = samples.point(i).norm();
    if (r >= r_inner && r <= r_outer) density[i] = 1.0;
  }
  if (density.sum() == 0.0)
    throw std::invalid_argument("annulus_reference_density: no grid cell inside the annulus");
  return ProbabilityVector::normalized(std::move(density));
}

SolveConfig build_fpk_experiment(const GridSpec& grid, double alpha, double tau,
                                 double beta, double epsilon) {
  SolveConfig cfg;
  cfg.preset = "fpk";
  cfg.grid = grid;
  cfg.alpha = alpha;
  cfg.tau = tau;
  cfg.beta = beta;
  cfg.epsilon = epsilon;
  cfg.prox_delta = 1e-4;
  cfg.prox_sweeps = 20;
  cfg.validate();
  return cfg;
}

SolveConfig build_aggregation_experiment(const GridSpec& grid, int case_id, double alpha,
                                         double tau, double beta, double epsilon, double h) {
  if (case_id < 1 || case_id > 4)
    throw ConfigError("aggregation case must be in 1..4");
  SolveConfig cfg;
  cfg.preset = "aggregation-case" + std::to_string(case_id);
  cfg.grid = grid;
  cfg.alpha = alpha;
  cfg.tau = tau;
  cfg.beta = beta;
  cfg.epsilon = epsilon;
  cfg.h = h;
  cfg.validate();
  return cfg;
}

void apply_preset(SolveConfig& config, const std::string& preset) {
  if (preset != "fpk" && preset.rfind("aggregation-case", 0) != 0)
    throw ConfigError("unknown preset '" + preset + "'");
  config.preset = preset;
  config.pde.clear();
  config.split.clear();
  if (preset.rfind("aggregation", 0) == 0 && config.beta == 1.0)
    config.beta = 1.0 / 0.0520;  // centralized-comparison temperature
  config.validate();
}

namespace {

SplittingSpec splitting_for(const SolveConfig& config,
                            std::vector<PdeOperator>& pde_operators, bool& is_fpk) {
  SplittingSpec spec;
  std::string pde = config.pde;
  if (!config.preset.empty()) {
    if (config.preset == "fpk") {
      pde = "fpk";
      spec.groups = {{PdeOperator::Advection}, {PdeOperator::LogDiffusion}};
    } else if (config.preset.rfind("aggregation-case", 0) == 0) {
      pde = "aggregation";
      const std::string suffix = config.preset.substr(std::string("aggregation-case").size());
      if (suffix == "1")
        spec.groups = {{PdeOperator::Advection, PdeOperator::QuadraticDiffusion},
                       {PdeOperator::Interaction}};
      else if (suffix == "2")
        spec.groups = {{PdeOperator::Interaction, PdeOperator::QuadraticDiffusion},
                       {PdeOperator::Advection}};
      else if (suffix == "3")
        spec.groups = {{PdeOperator::Interaction, PdeOperator::Advection},
                       {PdeOperator::QuadraticDiffusion}};
      else if (suffix == "4")
        spec.groups = {{PdeOperator::Advection},
                       {PdeOperator::Interaction},
                       {PdeOperator::QuadraticDiffusion}};
      else
        throw ConfigError("unknown preset '" + config.preset + "'");
    } else {
      throw ConfigError("unknown preset '" + config.preset + "'");
    }
  } else {
    for (const auto& group : config.split) {
      std::vector<PdeOperator> ops;
      for (const auto& name : group) ops.push_back(operator_from_name(name));
      spec.groups.push_back(std::move(ops));
    }
  }

  if (pde == "fpk") {
    is_fpk = true;
    pde_operators = {PdeOperator::Advection, PdeOperator::LogDiffusion};
  } else if (pde == "aggregation") {
    is_fpk = false;
    pde_operators = {PdeOperator::Advection, PdeOperator::Interaction,
                     PdeOperator::QuadraticDiffusion};
  } else {
    throw ConfigError("unknown pde '" + pde + "'");
  }
  spec.validate(pde_operators);
  return spec;
}

}  // namespace

CompiledProblem compile_problem(const SolveConfig& config) {
  config.validate();
  std::vector<PdeOperator> pde_operators;
  bool is_fpk = false;
  const SplittingSpec spec = splitting_for(config, pde_operators, is_fpk);

  std::vector<AxisBounds> bounds;
  for (size_t a = 0; a < config.grid.lo.size(); ++a)
    bounds.push_back({config.grid.lo[a], config.grid.hi[a]});
  SampleSet samples = make_uniform_grid(bounds, config.grid.counts);
  CostMatrix cost = cost_matrix(samples);
  GibbsKernel kernel = gibbs_kernel(cost, config.epsilon, config.kernel_mode);

  const ScalarField V = is_fpk ? ScalarField(fpk_potential)
                               : ScalarField(aggregation_drift_potential);
  const int n_samples = samples.size();
  VectorXd drift;
  MatrixXd interaction;
  bool need_drift = false, need_interaction = false;
  for (const auto& group : spec.groups)
    for (PdeOperator op : group) {
      need_drift |= op == PdeOperator::Advection;
      need_interaction |= op == PdeOperator::Interaction;
    }
  if (need_drift) drift = discretize_drift(V, samples, config.h);
  if (need_interaction)
    interaction = discretize_interaction(aggregation_interaction_potential, samples, config.h);

  std::vector<FreeEnergyFunctional> functionals;
  for (const auto& group : spec.groups) {
    FreeEnergyFunctional f;
    f.drift = VectorXd::Zero(n_samples);
    f.beta = config.beta;
    for (PdeOperator op : group) {
      switch (op) {
        case PdeOperator::Advection: f.drift = drift; break;
        case PdeOperator::Interaction: f.interaction = interaction; break;
        case PdeOperator::LogDiffusion: f.internal = InternalEnergy::LogEntropy; break;
        case PdeOperator::QuadraticDiffusion: f.internal = InternalEnergy::PowerLaw; break;
      }
    }
    f.validate(n_samples);
    functionals.push_back(std::move(f));
  }

  ProbabilityVector initial = initial_mixture(samples);
  std::optional<StationaryReference> reference;
  if (is_fpk)
    reference = StationaryReference{
        StationaryReference::Kind::Gibbs,
        gibbs_reference_density(samples, V, config.beta, config.h)};
  else
    reference = StationaryReference{
        StationaryReference::Kind::Annulus,
        annulus_reference_density(samples, 0.5, 0.5 * std::sqrt(5.0))};

  return CompiledProblem{std::move(samples), std::move(cost), std::move(kernel),
                         std::move(functionals), std::move(initial), std::move(reference)};
}

double distance_to_reference(const ProbabilityVector& mu, const StationaryReference& ref,
                             const CostMatrix& C) {
  return exact_wasserstein(mu, ref.density, C);
}

std::uint64_t count_groupings(int n_summands, int r_computers, bool exclude_centralized) {
  if (n_summands < 1 || r_computers < 1 || r_computers > n_summands)
    throw std::invalid_argument("count_groupings: need 1 <= r <= n");
  // Stirling numbers of the second kind, S(n, k).
  std::vector<std::vector<std::uint64_t>> S(n_summands + 1,
                                            std::vector<std::uint64_t>(n_summands + 1, 0));
  S[0][0] = 1;
  for (int n = 1; n <= n_summands; ++n)
    for (int k = 1; k <= n; ++k)
      S[n][k] = S[n - 1][k - 1] + static_cast<std::uint64_t>(k) * S[n - 1][k];
  std::uint64_t total = 0;
  for (int k = 1; k <= r_computers; ++k) total += S[n_summands][k];
  if (exclude_centralized) total -= 1;  // the single-group arrangement
  return total;
}

std::vector<std::vector<std::vector<int>>> enumerate_groupings(int n_summands,
                                                               int r_computers) {
  if (n_summands < 1 || r_computers < 1 || r_computers > n_summands)
    throw std::invalid_argument("enumerate_groupings: need 1 <= r <= n");
  if (n_summands > 8)
    throw std::invalid_argument("enumerate_groupings: n too large (max 8)");

  std::vector<std::vector<std::vector<int>>> out;
  std::vector<int> assignment(n_summands, 0);
  // Restricted growth strings: a[0] = 0, a[i] <= max(a[0..i-1]) + 1.
  auto emit = [&]() {
    const int blocks = *std::max_element(assignment.begin(), assignment.end()) + 1;
    if (blocks > r_computers) return;
    std::vector<std::vector<int>> partition(blocks);
    for (int i = 0; i < n_summands; ++i) partition[assignment[i]].push_back(i);
    out.push_back(std::move(partition));
  };
  // Lexicographic enumeration of restricted growth strings.
  std::function<void(int, int)> rec = [&](int i, int max_used) {
    if (i == n_summands) {
      emit();
      return;
    }
    for (int b = 0; b <= max_used + 1 && b < n_summands; ++b) {
      assignment[i] = b;
      rec(i + 1, std::max(max_used, b));
    }
  };
  assignment[0] = 0;
  rec(1, 0);
  return out;
}

}  // namespace wadmm
