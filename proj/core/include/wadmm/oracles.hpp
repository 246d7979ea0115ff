#pragma once

#include <functional>
#include <vector>

#include "wadmm/functionals.hpp"
#include "wadmm/inner_admm.hpp"
#include "wadmm/measures.hpp"
#include "wadmm/transport.hpp"

// Independent reference implementations used to certify the solver. Nothing
// here calls into the prox/ADMM code paths it checks: the prox oracle
// minimizes over raw plan entries, the barycenter oracle runs iterative
// Bregman projections, the projection oracle evaluates the dense
// pseudoinverse formula, and the LP oracle enumerates basic feasible
// solutions.
namespace wadmm::oracles {

struct BruteForceProxSpec {
  const CostMatrix* cost = nullptr;
  double epsilon = 0.1;
  double alpha = 1.0;
  VectorXd a;                 // effective drift (includes nu and any U mu_prev)
  InternalEnergy internal = InternalEnergy::None;
  double beta = 1.0;
};

struct BruteForceProxResult {
  VectorXd mu;        // row sums of the optimal plan
  MatrixXd plan;
  double objective = 0.0;
  long iterations = 0;
};

// Minimizes  <C/2 + eps log M, M> + (1/alpha) G(M 1)  over plans M >= 0 with
// column marginal fixed to zeta, by projected gradient with a monotone
// backtracking step; mu is read off as the row sums.
BruteForceProxResult brute_force_prox(const BruteForceProxSpec& spec,
                                      const ProbabilityVector& zeta,
                                      long max_iters = 200000, double tol = 1e-13);

// Objective of the minimization above at a given plan.
double brute_force_objective(const BruteForceProxSpec& spec, const MatrixXd& plan);

// Sinkhorn-regularized Wasserstein barycenter of equally weighted marginals
// by iterative Bregman projections on the shared column marginal.
ProbabilityVector ibp_barycenter(const std::vector<ProbabilityVector>& mus,
                                 const GibbsKernel& kernel, int max_iters = 50000,
                                 double tol = 1e-13);

// Exact transportation LP value by enumerating spanning-tree bases of the
// complete bipartite graph. Exponential; restricted to N <= 6 per side.
double vertex_enumeration_wasserstein(const ProbabilityVector& mu,
                                      const ProbabilityVector& zeta,
                                      const CostMatrix& C);

// proj_C(v) = v - A^+ (A v - target) where A = [I ... I], with the
// pseudoinverse computed densely.
std::vector<VectorXd> pseudoinverse_projection(const std::vector<VectorXd>& vs,
                                               const VectorXd& target);

// Central finite differences of a scalar function.
VectorXd finite_difference_gradient(const std::function<double(const VectorXd&)>& f,
                                    const VectorXd& u, double step);
MatrixXd finite_difference_jacobian(
    const std::function<VectorXd(const VectorXd&)>& g, const VectorXd& u, double step);

struct GradientDescentResult {
  VectorXd u;
  int iterations = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
};

// Reference gradient descent with backtracking line search on the proximal
// objective (tau/2)||u - v||^2 + f(u); stops at the gradient-norm tolerance
// or after max_iters.
GradientDescentResult gradient_descent_prox(const VectorXd& v, const ProbabilityVector& mu,
                                            const GibbsKernel& kernel, double tau,
                                            const VectorXd& u0, double tol, int max_iters,
                                            double backtrack_alpha, double backtrack_beta);

}  // namespace wadmm::oracles
