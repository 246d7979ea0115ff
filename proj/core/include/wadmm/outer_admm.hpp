#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wadmm/functionals.hpp"
#include "wadmm/inner_admm.hpp"
#include "wadmm/pde_flows.hpp"
#include "wadmm/solve_config.hpp"

namespace wadmm {

// Full state of the outer consensus loop at iteration k.
struct OuterState {
  std::vector<ProbabilityVector> mus;
  ProbabilityVector zeta;
  std::vector<VectorXd> nus;
  int k = 0;
  double alpha = 1.0;
  std::vector<FreeEnergyFunctional> functionals;

  int workers() const { return static_cast<int>(mus.size()); }
  void validate() const;
};

// Pairwise exact transport costs between the worker iterates plus the split
// objective at the consensus representative.
struct ConsensusReport {
  MatrixXd pairwise;
  double max_pairwise = 0.0;
  double objective = 0.0;
};

VectorXd nu_sum(const OuterState& state);

// One round of per-worker proximal updates anchored at zeta^k. Each worker
// sees only (F_i, nu_i, mu_i, zeta); failures are tagged with the worker
// index.
std::vector<ProxResult> mu_update_all(const OuterState& state, const GibbsKernel& kernel,
                                      const ProxParams& params, int threads);

// Dual ascent nu_i + alpha (mu_i^{new} - zeta^{new}).
std::vector<VectorXd> nu_update_all(const OuterState& state,
                                    const std::vector<ProbabilityVector>& new_mus,
                                    const ProbabilityVector& new_zeta);

// `use_zeta` evaluates the objective at zeta instead of the normalized mean
// of the worker iterates.
ConsensusReport consensus_report(const OuterState& state, const CostMatrix& C,
                                 bool use_zeta = false);

struct Snapshot {
  int k = 0;
  std::vector<ProbabilityVector> mus;
  ProbabilityVector zeta;
  std::vector<VectorXd> nus;
  ConsensusReport report;
  double inner_deviation = 0.0;
  double wall_clock_sec = 0.0;
};

struct SolveCallbacks {
  // Called with every emitted snapshot (k = 0, every snapshot_every
  // iterations, and the final iteration).
  std::function<void(const Snapshot&)> on_snapshot;
  // Called after every iteration; cheap observer, no report attached.
  std::function<void(const OuterState&)> on_iteration;
};

struct OuterResult {
  OuterState state;
  int iterations = 0;
  double wall_clock_sec = 0.0;
  bool reached_consensus_tol = false;
  // set when the configured tau dipped below the sufficiency bound
  bool tau_warning = false;
  double tau_bound_seen = 0.0;
};

// Steps 0-5 of the pipeline: per-worker mu proxes, inner-ADMM zeta update,
// dual ascent; barrier-synchronized rounds with all reductions in fixed
// index order. Stops at max_outer_iters or when the snapshot-cadence
// max pairwise distance falls below consensus_tol.
OuterResult run_outer(const SolveConfig& config, const SolveCallbacks& callbacks = {});

// As above but on an already-compiled problem (the CLI compiles once to also
// write reference data).
OuterResult run_outer(const CompiledProblem& problem, const SolveConfig& config,
                      const SolveCallbacks& callbacks = {});

}  // namespace wadmm
