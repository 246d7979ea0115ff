#pragma once

#include "wadmm/measures.hpp"

namespace wadmm {

// Coupling of two probability vectors: row sums match row_marginal and column
// sums match col_marginal within 1e-8.
struct TransportPlan {
  MatrixXd matrix;
  ProbabilityVector row_marginal;
  ProbabilityVector col_marginal;

  TransportPlan(MatrixXd m, ProbabilityVector row, ProbabilityVector col);
};

// Exponentiated scaled duals y = exp(lambda0 / alpha eps), z = exp(lambda1 / alpha eps)
// of the entropic transport/prox dual systems.
struct DualFactors {
  VectorXd y;
  VectorXd z;
};

struct SinkhornResult {
  double value = 0.0;  // <C/2 + eps log M, M> on the returned plan, 0 log 0 = 0
  TransportPlan plan;
  DualFactors factors;
  int sweeps = 0;
  double marginal_error = 0.0;  // max Linf deviation of either marginal
  bool converged = false;
};

// Entropic transport between strictly positive marginals by alternating
// diagonal scalings (y first, then z). Non-convergence is reported through
// `converged`/`marginal_error` on the returned result, not thrown.
SinkhornResult sinkhorn_divergence(const ProbabilityVector& mu,
                                   const ProbabilityVector& zeta,
                                   const GibbsKernel& kernel,
                                   int max_sweeps, double tol);

// Optimal value of the Kantorovich LP  min <C, M>  over couplings of
// (mu, zeta); i.e. the squared Wasserstein distance on the sample set.
// Solved exactly by successive shortest paths with node potentials.
// Diagnostics only; never called inside the solver hot loop.
double exact_wasserstein(const ProbabilityVector& mu, const ProbabilityVector& zeta,
                         const CostMatrix& C);

// Plan objective <C/2 + eps log M, M> with the 0 log 0 = 0 convention.
double plan_objective(const MatrixXd& plan, const CostMatrix& C, double epsilon);

}  // namespace wadmm
