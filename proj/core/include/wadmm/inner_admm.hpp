#pragma once

#include <optional>
#include <vector>

#include "wadmm/measures.hpp"

namespace wadmm {

// Inputs of one barycentric zeta-update: the fresh mu_i^{k+1}, the kernel,
// and the linear-regularization data nu_sum, alpha.
struct BarycentricInputs {
  std::vector<ProbabilityVector> mus;
  const GibbsKernel* kernel = nullptr;
  VectorXd nu_sum;
  double alpha = 1.0;

  int workers() const { return static_cast<int>(mus.size()); }
  void validate() const;
  VectorXd target() const { return (2.0 / alpha) * nu_sum; }
};

// Inner-ADMM variables. After any z-update, sum_i z_i equals the target
// (2/alpha) nu_sum to within roundoff.
struct InnerDualState {
  std::vector<VectorXd> us, zs, nutildes;
  double tau = 0.0;
  VectorXd target;
  int ell = 0;
};

struct NewtonParams {
  double tol = 1e-4;           // stop when half the squared Newton decrement <= tol
  int max_iter = 50;
  double backtrack_alpha = 0.3;
  double backtrack_beta = 0.7;
};

struct NewtonResult {
  VectorXd u;
  int iterations = 0;
  double decrement = 0.0;  // half squared Newton decrement at exit
  double objective = 0.0;
};

// f(u) = <mu, log(Gamma exp(u/eps))>: one summand of the zeta-update dual.
// Affine along the ones direction with slope 1/eps.
double dual_objective_f(const VectorXd& u, const ProbabilityVector& mu,
                        const GibbsKernel& kernel);

// grad f = (1/eps) e .* (Gamma (mu ./ (Gamma e))), e = exp(u/eps).
// Components are positive and sum to 1/eps.
VectorXd grad_f(const VectorXd& u, const ProbabilityVector& mu, const GibbsKernel& kernel);

// Dense Hessian of f: positive semidefinite, annihilates the ones vector.
// Used for analytics and small instances; the Newton solver applies the
// Hessian matrix-free.
MatrixXd hess_f(const VectorXd& u, const ProbabilityVector& mu, const GibbsKernel& kernel);

// argmin_u (tau/2)||u - v||^2 + f(u) by Newton with backtracking line search.
// The Newton system (tau I + hess f) d = -grad is solved by conjugate
// gradients on the matrix-free Hessian action. Throws on line-search failure
// or when max_iter is exceeded (message carries the final decrement).
NewtonResult prox_f_newton(const VectorXd& v, const ProbabilityVector& mu,
                           const GibbsKernel& kernel, double tau,
                           const NewtonParams& params,
                           const std::optional<VectorXd>& u0 = std::nullopt);

// Euclidean projection onto {sum_i z_i = target}: v_i - mean(v) + target/n.
std::vector<VectorXd> project_consensus(const std::vector<VectorXd>& vs,
                                        const VectorXd& target);

// One barrier-synchronized round of the inner ADMM: parallel u-updates
// (Newton proxes), consensus projection for z, dual ascent for nutilde.
void inner_step(InnerDualState& state, const BarycentricInputs& inputs,
                const NewtonParams& params, int threads);

// Sufficient penalty for inner-ADMM convergence: (sqrt(2)/eps^2) max over
// workers of ||Gamma mu_i||_inf. The sufficiency lemma names one worker; the
// max over all of them is the conservative runtime check.
double tau_lower_bound(const BarycentricInputs& inputs);

InnerDualState cold_start(const BarycentricInputs& inputs, double tau);

struct InnerResult {
  ProbabilityVector zeta;
  InnerDualState state;
  double deviation = 0.0;  // max Linf spread of the per-worker zeta candidates
};

// Runs `iters` inner steps (warm-started if a previous state is supplied),
// then recovers zeta from each worker via
//   exp(u_i/eps) .* (Gamma (mu_i ./ (Gamma exp(u_i/eps)))),
// renormalizes each candidate and returns their normalized mean. The spread
// between candidates is surfaced as `deviation` rather than hidden.
InnerResult run_inner(const BarycentricInputs& inputs,
                      std::optional<InnerDualState> warm, int iters, double tau,
                      const NewtonParams& params, int threads);

}  // namespace wadmm
