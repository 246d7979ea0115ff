#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "wadmm/measures.hpp"
#include "wadmm/transport.hpp"

namespace wadmm {

enum class InternalEnergy { None, LogEntropy, PowerLaw };

// One summand F_i of the split free energy:
//   <drift, mu> + <interaction * mu, mu> + internal energy,
// where the internal energy is beta^-1 <log mu, mu> (LogEntropy) or
// beta^-1 <mu, mu> (PowerLaw with exponent m = 2, the only supported m).
// The interaction term is handled semi-implicitly: its proximal contribution
// is linearized at the worker's previous iterate.
struct FreeEnergyFunctional {
  VectorXd drift;                          // V at samples; zero vector if absent
  std::optional<MatrixXd> interaction;     // symmetric N x N, U(theta_i - theta_j)
  InternalEnergy internal = InternalEnergy::None;
  double beta = 1.0;
  int power_m = 2;

  void validate(int n) const;
  // F_i(mu), interaction evaluated at mu itself (reporting, not prox).
  double value(const VectorXd& mu) const;
};

struct ProxParams {
  double alpha = 1.0;   // ADMM penalty
  double delta = 1e-4;  // fixed-point tolerance
  int max_sweeps = 20;  // L

  void validate() const;
};

struct ProxResult {
  ProbabilityVector mu;
  DualFactors factors;
  int sweeps = 0;
  double residual = 0.0;  // max relative change in the last sweep
  bool converged = true;
  std::vector<double> sweep_residuals;  // residual after each sweep
};

// a_eff = drift + interaction * mu_prev + nu (semi-implicit linearization).
VectorXd effective_drift(const FreeEnergyFunctional& f, const VectorXd& nu,
                         const ProbabilityVector& mu_prev);

// Closed-form prox of a linear functional <a, .>:
//   exp(-a/(alpha eps)) .* (Gamma^T (zeta ./ (Gamma exp(-a/(alpha eps))))).
ProxResult prox_linear(const VectorXd& a, const ProbabilityVector& zeta,
                       const GibbsKernel& kernel, double alpha);

// Prox of <a, .> + beta^-1 <log ., .> via the contractive block-coordinate
// recursion on the exponentiated duals (y, z):
//   y <- zeta ./ (Gamma z)
//   z <- exp(-(beta a + 1)/(1 + beta alpha eps)) .* (Gamma^T y)^(-1/(1 + beta alpha eps))
// and mu = z .* (Gamma^T y) on exit.
ProxResult prox_log_entropy(double beta, const VectorXd& a, const ProbabilityVector& zeta,
                            const GibbsKernel& kernel, const ProxParams& params);

// Prox of <a, .> + beta^-1 <., .> (power-law internal energy, m = 2). The
// z-block solves  z .* (Gamma^T y) = (beta/2)(-alpha eps ln z - a)
// coordinatewise; each scalar equation has a unique positive root.
ProxResult prox_power_law(double beta, const VectorXd& a, const ProbabilityVector& zeta,
                          const GibbsKernel& kernel, const ProxParams& params);

// Dispatch on the internal energy, with a = effective_drift(f, nu, mu_prev).
ProxResult prox(const FreeEnergyFunctional& f, const VectorXd& nu,
                const ProbabilityVector& mu_prev, const ProbabilityVector& zeta,
                const GibbsKernel& kernel, const ProxParams& params);

using ScalarField = std::function<double(const VectorXd&)>;

// Samples V and U on the grid: drift(j) = V(theta_j), interaction(i,j) =
// U(theta_i - theta_j). Evaluations that come out non-finite (potentials with
// a point singularity) are replaced by the mean over a 5x5-per-axis stencil
// on the cell of width 2h centered at the singular point, excluding stencil
// points that are themselves singular.
std::pair<VectorXd, MatrixXd> discretize_potentials(const ScalarField& V,
                                                    const ScalarField& U,
                                                    const SampleSet& samples, double h);
VectorXd discretize_drift(const ScalarField& V, const SampleSet& samples, double h);
MatrixXd discretize_interaction(const ScalarField& U, const SampleSet& samples, double h);

}  // namespace wadmm
