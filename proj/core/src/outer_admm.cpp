#include "wadmm/outer_admm.hpp"

#include <chrono>
#include <cmath>
#include <iostream>

#include "wadmm/parallel.hpp"
#include "wadmm/transport.hpp"

namespace wadmm {

void OuterState::validate() const {
  if (workers() < 2) throw std::invalid_argument("OuterState: need n >= 2 workers");
  const int n = zeta.size();
  if (static_cast<int>(nus.size()) != workers() ||
      static_cast<int>(functionals.size()) != workers())
    throw std::invalid_argument("OuterState: mus/nus/functionals count mismatch");
  for (const auto& mu : mus)
    if (mu.size() != n) throw std::invalid_argument("OuterState: mu size mismatch");
  for (const auto& nu : nus) {
    if (nu.size() != n) throw std::invalid_argument("OuterState: nu size mismatch");
    if (!nu.allFinite()) throw std::invalid_argument("OuterState: non-finite multiplier");
  }
  if (!(alpha > 0.0)) throw std::invalid_argument("OuterState: alpha must be positive");
  for (const auto& f : functionals) f.validate(n);
}

VectorXd nu_sum(const OuterState& state) {
  VectorXd sum = VectorXd::Zero(state.zeta.size());
  for (const auto& nu : state.nus) sum += nu;  // fixed index order
  return sum;
}

std::vector<ProxResult> mu_update_all(const OuterState& state, const GibbsKernel& kernel,
                                      const ProxParams& params, int threads) {
  state.validate();
  const int n = state.workers();
  std::vector<std::optional<ProxResult>> slots(n);
  parallel_for_workers(n, threads, [&](int i) {
    slots[i] = prox(state.functionals[i], state.nus[i], state.mus[i], state.zeta,
                    kernel, params);
  });
  std::vector<ProxResult> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::vector<VectorXd> nu_update_all(const OuterState& state,
                                    const std::vector<ProbabilityVector>& new_mus,
                                    const ProbabilityVector& new_zeta) {
  if (static_cast<int>(new_mus.size()) != state.workers())
    throw std::invalid_argument("nu_update_all: worker count mismatch");
  std::vector<VectorXd> out;
  out.reserve(state.nus.size());
  for (size_t i = 0; i < state.nus.size(); ++i)
    out.push_back(state.nus[i] + state.alpha * (new_mus[i].values() - new_zeta.values()));
  return out;
}

ConsensusReport consensus_report(const OuterState& state, const CostMatrix& C,
                                 bool use_zeta) {
  const int n = state.workers();
  ConsensusReport report;
  report.pairwise = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double w = exact_wasserstein(state.mus[i], state.mus[j], C);
      report.pairwise(i, j) = w;
      report.pairwise(j, i) = w;
      report.max_pairwise = std::max(report.max_pairwise, w);
    }

  VectorXd proxy;
  if (use_zeta) {
    proxy = state.zeta.values();
  } else {
    VectorXd mean = VectorXd::Zero(state.zeta.size());
    for (const auto& mu : state.mus) mean += mu.values();
    proxy = ProbabilityVector::normalized(mean).values();
  }
  report.objective = 0.0;
  for (const auto& f : state.functionals) report.objective += f.value(proxy);
  return report;
}

OuterResult run_outer(const SolveConfig& config, const SolveCallbacks& callbacks) {
  return run_outer(compile_problem(config), config, callbacks);
}

OuterResult run_outer(const CompiledProblem& problem, const SolveConfig& config,
                      const SolveCallbacks& callbacks) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  OuterState state;
  state.alpha = config.alpha;
  state.functionals = problem.functionals;
  state.zeta = problem.initial;
  state.mus.assign(problem.functionals.size(), problem.initial);
  state.nus.assign(problem.functionals.size(),
                   VectorXd::Zero(problem.initial.size()));
  state.k = 0;
  state.validate();

  const ProxParams prox_params{config.alpha, config.prox_delta, config.prox_sweeps};
  const NewtonParams newton_params{config.newton_tol, config.max_newton,
                                   config.backtrack_alpha, config.backtrack_beta};
  const bool report_at_zeta = config.consensus_objective == "zeta";

  OuterResult result;
  result.tau_bound_seen = 0.0;
  double last_deviation = 0.0;
  std::optional<InnerDualState> inner_state;

  auto check_tau = [&](const BarycentricInputs& inputs) {
    const double bound = tau_lower_bound(inputs);
    result.tau_bound_seen = std::max(result.tau_bound_seen, bound);
    if (config.tau <= bound && !result.tau_warning) {
      result.tau_warning = true;
      std::cerr << "warning: tau = " << config.tau
                << " is below the inner-ADMM sufficiency bound " << bound
                << "; convergence is not guaranteed (the bound is sufficient, "
                   "not necessary)\n";
    }
  };

  auto emit_snapshot = [&](bool check_tol) -> bool {
    Snapshot snap{state.k, state.mus, state.zeta, state.nus,
                  consensus_report(state, problem.cost, report_at_zeta),
                  last_deviation, elapsed()};
    if (callbacks.on_snapshot) callbacks.on_snapshot(snap);
    return check_tol && snap.report.max_pairwise <= config.consensus_tol;
  };

  {
    BarycentricInputs probe{state.mus, &problem.kernel, nu_sum(state), config.alpha};
    check_tau(probe);
  }
  emit_snapshot(false);

  bool stop = false;
  while (!stop && state.k < config.max_outer_iters) {
    // Step 2: distributed proximal updates anchored at zeta^k.
    std::vector<ProxResult> prox_results =
        mu_update_all(state, problem.kernel, prox_params, config.threads);
    std::vector<ProbabilityVector> new_mus;
    new_mus.reserve(prox_results.size());
    for (auto& r : prox_results) new_mus.push_back(std::move(r.mu));

    // Steps 3-4: inner ADMM for the barycentric zeta update.
    BarycentricInputs inputs{new_mus, &problem.kernel, nu_sum(state), config.alpha};
    check_tau(inputs);
    InnerResult inner =
        run_inner(inputs, config.warm_start ? std::move(inner_state) : std::nullopt,
                  config.inner_iters, config.tau, newton_params, config.threads);
    inner_state = std::move(inner.state);
    last_deviation = inner.deviation;

    // Step 5: dual ascent.
    std::vector<VectorXd> new_nus = nu_update_all(state, new_mus, inner.zeta);

    state.mus = std::move(new_mus);
    state.zeta = std::move(inner.zeta);
    state.nus = std::move(new_nus);
    ++state.k;

    if (callbacks.on_iteration) callbacks.on_iteration(state);
    if (state.k % config.snapshot_every == 0)
      stop = emit_snapshot(true);
  }

  if (state.k % config.snapshot_every != 0) emit_snapshot(false);

  result.state = std::move(state);
  result.iterations = result.state.k;
  result.wall_clock_sec = elapsed();
  result.reached_consensus_tol = stop;
  return result;
}

}  // namespace wadmm
