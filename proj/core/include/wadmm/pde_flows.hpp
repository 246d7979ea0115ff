#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wadmm/functionals.hpp"
#include "wadmm/solve_config.hpp"

namespace wadmm {

// Spatial operators of the supported PDEs. Each splitting group compiles to
// one FreeEnergyFunctional: advection -> drift term, interaction ->
// semi-implicit interaction matrix, *_diffusion -> internal energy.
enum class PdeOperator { Advection, Interaction, LogDiffusion, QuadraticDiffusion };

struct SplittingSpec {
  std::vector<std::vector<PdeOperator>> groups;

  // Groups must be nonempty, disjoint, cover exactly the operators present in
  // the target PDE, and contain at most one diffusion operator each.
  void validate(const std::vector<PdeOperator>& pde_operators) const;
};

struct StationaryReference {
  enum class Kind { Gibbs, Annulus };
  Kind kind;
  ProbabilityVector density;
};

// Quartic double-well drift of the linear Fokker-Planck case study.
double fpk_potential(const VectorXd& theta);
// Aggregation case study potentials; both are singular at the origin.
double aggregation_drift_potential(const VectorXd& theta);
double aggregation_interaction_potential(const VectorXd& theta);

// The shared initial density: five-component Gaussian mixture at
// (+-1, +-1), (0,0) with covariance 0.1 I.
ProbabilityVector initial_mixture(const SampleSet& samples);

ProbabilityVector gibbs_reference_density(const SampleSet& samples,
                                          const ScalarField& V, double beta, double h);
// Uniform on cells whose centers satisfy r_inner <= |theta| <= r_outer.
ProbabilityVector annulus_reference_density(const SampleSet& samples,
                                            double r_inner, double r_outer);

SolveConfig build_fpk_experiment(const GridSpec& grid, double alpha, double tau,
                                 double beta, double epsilon);
SolveConfig build_aggregation_experiment(const GridSpec& grid, int case_id, double alpha,
                                         double tau, double beta, double epsilon, double h);

// Applies a preset name onto a config (used by the CLI --preset flag).
void apply_preset(SolveConfig& config, const std::string& preset);

// Everything run_outer needs, compiled from a validated SolveConfig.
struct CompiledProblem {
  SampleSet samples;
  CostMatrix cost;
  GibbsKernel kernel;
  std::vector<FreeEnergyFunctional> functionals;
  ProbabilityVector initial;
  std::optional<StationaryReference> reference;
};

CompiledProblem compile_problem(const SolveConfig& config);

double distance_to_reference(const ProbabilityVector& mu, const StationaryReference& ref,
                             const CostMatrix& C);

// Number of ways to distribute n distinct summands over at most r
// indistinguishable computers: sum_{k=1..r} S(n, k) (Stirling second kind).
// With exclude_centralized, the single-group arrangement is discounted,
// giving B_n - 1 at r = n.
std::uint64_t count_groupings(int n_summands, int r_computers, bool exclude_centralized);

// All set partitions of {0..n-1} into at most r blocks, in restricted-growth-
// string order; blocks are sorted and ordered by smallest element.
std::vector<std::vector<std::vector<int>>> enumerate_groupings(int n_summands,
                                                               int r_computers);

}  // namespace wadmm
