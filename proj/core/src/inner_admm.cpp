#include "wadmm/inner_admm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "wadmm/parallel.hpp"

namespace wadmm {

void BarycentricInputs::validate() const {
  if (mus.empty()) throw std::invalid_argument("BarycentricInputs: no workers");
  if (!kernel) throw std::invalid_argument("BarycentricInputs: kernel not set");
  const int n = kernel->size();
  for (const auto& mu : mus) {
    if (mu.size() != n) throw std::invalid_argument("BarycentricInputs: mu size mismatch");
    if ((mu.values().array() <= 0.0).any())
      throw std::invalid_argument("BarycentricInputs: mus must be strictly positive");
  }
  if (nu_sum.size() != n) throw std::invalid_argument("BarycentricInputs: nu_sum size mismatch");
  if (!(alpha > 0.0)) throw std::invalid_argument("BarycentricInputs: alpha must be positive");
}

namespace {

void check_positive_finite(const VectorXd& v, const char* where) {
  for (int i = 0; i < v.size(); ++i)
    if (!(v[i] > 0.0) || !std::isfinite(v[i]))
      throw std::runtime_error(std::string(where) +
                               ": kernel application left the positive range in "
                               "direct mode; use log_domain (log-sum-exp) mode");
}

// Shared per-point quantities of f, grad f and the Hessian action, built once
// per Newton iteration. All expressions are invariant under u -> u + c 1, so
// the exponentials are taken after shifting by max(u).
struct DualCurvature {
  double epsilon;
  bool log_mode;
  double shift;        // max(u)/eps
  VectorXd e;          // exp(u/eps - shift)
  VectorXd ge;         // Gamma e   (direct mode)
  VectorXd q;          // mu ./ ge  (direct mode)
  VectorXd d1;         // e .* Gamma q = eps * grad f
  const GibbsKernel* kernel;
  const VectorXd* mu;
  MatrixXd P;          // row-stochastic diag(1/Gamma e) Gamma diag(e) (log mode)

  DualCurvature(const VectorXd& u, const ProbabilityVector& mu_in, const GibbsKernel& k)
      : epsilon(k.epsilon()), log_mode(k.mode() == KernelMode::LogDomain),
        kernel(&k), mu(&mu_in.values()) {
    const int n = k.size();
    shift = u.maxCoeff() / epsilon;
    e = (u / epsilon).array() - shift;
    e = e.array().exp();
    if (!log_mode) {
      ge = k.apply(e);
      check_positive_finite(ge, "dual objective");
      q = mu->cwiseQuotient(ge);
      d1 = e.cwiseProduct(k.apply(q));
    } else {
      const VectorXd le = u / epsilon;
      const VectorXd lge = k.log_apply(le);
      P.resize(n, n);
      for (int j = 0; j < n; ++j)
        P.row(j) = (k.log_gamma().row(j).transpose() + le).array() - lge[j];
      P = P.array().exp();  // entries in [0,1]; rows sum to 1
      d1 = P.transpose() * (*mu);
    }
  }

  // H v = (1/eps^2) (d1 .* v - e .* Gamma((q./ge) .* Gamma(e .* v)))
  VectorXd hess_apply(const VectorXd& v) const {
    if (!log_mode) {
      const VectorXd inner = kernel->apply(e.cwiseProduct(v));
      const VectorXd outer = kernel->apply(q.cwiseQuotient(ge).cwiseProduct(inner));
      return (d1.cwiseProduct(v) - e.cwiseProduct(outer)) / (epsilon * epsilon);
    }
    const VectorXd pv = P * v;
    return (d1.cwiseProduct(v) - P.transpose() * mu->cwiseProduct(pv)) /
           (epsilon * epsilon);
  }
};

// Conjugate gradients on (tau I + H); H is PSD so the system is SPD.
VectorXd cg_solve(const DualCurvature& curv, double tau, const VectorXd& b) {
  const int n = static_cast<int>(b.size());
  VectorXd x = VectorXd::Zero(n);
  VectorXd r = b;
  VectorXd p = r;
  double rr = r.squaredNorm();
  const double tol2 = std::max(1e-28 * rr, 1e-300);
  for (int it = 0; it < 10 * n && rr > tol2; ++it) {
    const VectorXd ap = tau * p + curv.hess_apply(p);
    const double alpha = rr / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    const double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  return x;
}

}  // namespace

double dual_objective_f(const VectorXd& u, const ProbabilityVector& mu,
                        const GibbsKernel& kernel) {
  if (u.size() != kernel.size() || mu.size() != kernel.size())
    throw std::invalid_argument("dual_objective_f: size mismatch");
  if (kernel.mode() == KernelMode::LogDomain)
    return mu.values().dot(kernel.log_apply(u / kernel.epsilon()));
  const double shift = u.maxCoeff() / kernel.epsilon();
  const VectorXd e = ((u / kernel.epsilon()).array() - shift).exp();
  const VectorXd ge = kernel.apply(e);
  check_positive_finite(ge, "dual_objective_f");
  return shift + mu.values().dot(ge.array().log().matrix());
}

VectorXd grad_f(const VectorXd& u, const ProbabilityVector& mu, const GibbsKernel& kernel) {
  if (u.size() != kernel.size() || mu.size() != kernel.size())
    throw std::invalid_argument("grad_f: size mismatch");
  const double eps = kernel.epsilon();
  if (kernel.mode() == KernelMode::LogDomain) {
    const VectorXd le = u / eps;
    const VectorXd lq = mu.values().array().log().matrix() - kernel.log_apply(le);
    return (le + kernel.log_apply(lq)).array().exp().matrix() / eps;
  }
  const double shift = u.maxCoeff() / eps;
  const VectorXd e = ((u / eps).array() - shift).exp();
  const VectorXd ge = kernel.apply(e);
  check_positive_finite(ge, "grad_f");
  return e.cwiseProduct(kernel.apply(mu.values().cwiseQuotient(ge))) / eps;
}

MatrixXd hess_f(const VectorXd& u, const ProbabilityVector& mu, const GibbsKernel& kernel) {
  if (u.size() != kernel.size() || mu.size() != kernel.size())
    throw std::invalid_argument("hess_f: size mismatch");
  const int n = kernel.size();
  const double eps = kernel.epsilon();
  // H = (1/eps^2) sum_j mu_j (diag(rho_j) - rho_j rho_j^T), where rho_j is the
  // j-th kernel row reweighted by e and normalized; each rho_j is a
  // probability vector, which keeps the assembly in [0,1].
  const double shift = u.maxCoeff() / eps;
  const VectorXd e = ((u / eps).array() - shift).exp();
  VectorXd lge(n);
  if (kernel.mode() == KernelMode::LogDomain) {
    lge = kernel.log_apply(u / eps);
    lge.array() -= shift;
  } else {
    const VectorXd ge = kernel.apply(e);
    check_positive_finite(ge, "hess_f");
    lge = ge.array().log();
  }
  MatrixXd H = MatrixXd::Zero(n, n);
  VectorXd rho(n);
  for (int j = 0; j < n; ++j) {
    rho = ((kernel.log_gamma().row(j).transpose() + (u / eps)).array() - shift - lge[j])
              .exp();
    H.noalias() -= mu[j] * rho * rho.transpose();
    H.diagonal() += mu[j] * rho;
  }
  return H / (eps * eps);
}

NewtonResult prox_f_newton(const VectorXd& v, const ProbabilityVector& mu,
                           const GibbsKernel& kernel, double tau,
                           const NewtonParams& params,
                           const std::optional<VectorXd>& u0) {
  if (!(tau > 0.0)) throw std::invalid_argument("prox_f_newton: tau must be positive");
  if (v.size() != kernel.size())
    throw std::invalid_argument("prox_f_newton: size mismatch");

  VectorXd u = u0.value_or(v);
  auto objective = [&](const VectorXd& x) {
    return 0.5 * tau * (x - v).squaredNorm() + dual_objective_f(x, mu, kernel);
  };
  double phi = objective(u);
  double decrement = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= params.max_iter; ++it) {
    const VectorXd g = tau * (u - v) + grad_f(u, mu, kernel);
    const DualCurvature curv(u, mu, kernel);
    const VectorXd d = cg_solve(curv, tau, -g);
    decrement = 0.5 * std::max(0.0, -g.dot(d));
    if (decrement <= params.tol)
      return NewtonResult{u, it, decrement, phi};

    const double slope = g.dot(d);
    double t = 1.0;
    double phi_new = objective(u + t * d);
    while (phi_new > phi + params.backtrack_alpha * t * slope) {
      t *= params.backtrack_beta;
      if (t < 1e-20)
        throw std::runtime_error("prox_f_newton: backtracking line search failed");
      phi_new = objective(u + t * d);
    }
    u += t * d;
    phi = phi_new;
  }
  throw std::runtime_error(
      "prox_f_newton: max Newton iterations exceeded; half squared decrement = " +
      std::to_string(decrement));
}

std::vector<VectorXd> project_consensus(const std::vector<VectorXd>& vs,
                                        const VectorXd& target) {
  if (vs.empty()) throw std::invalid_argument("project_consensus: no vectors");
  const int n = static_cast<int>(vs.size());
  VectorXd mean = VectorXd::Zero(target.size());
  for (const auto& v : vs) {
    if (v.size() != target.size())
      throw std::invalid_argument("project_consensus: size mismatch");
    mean += v;
  }
  mean /= static_cast<double>(n);
  const VectorXd offset = target / static_cast<double>(n) - mean;
  std::vector<VectorXd> out;
  out.reserve(vs.size());
  for (const auto& v : vs) out.push_back(v + offset);
  return out;
}

double tau_lower_bound(const BarycentricInputs& inputs) {
  inputs.validate();
  const double eps = inputs.kernel->epsilon();
  double m = 0.0;
  for (const auto& mu : inputs.mus)
    m = std::max(m, inputs.kernel->apply(mu.values()).cwiseAbs().maxCoeff());
  return std::sqrt(2.0) / (eps * eps) * m;
}

InnerDualState cold_start(const BarycentricInputs& inputs, double tau) {
  inputs.validate();
  const int n = inputs.kernel->size();
  const int workers = inputs.workers();
  InnerDualState state;
  state.tau = tau;
  state.target = inputs.target();
  state.us.assign(workers, VectorXd::Zero(n));
  state.nutildes.assign(workers, VectorXd::Zero(n));
  state.zs = project_consensus(state.us, state.target);
  state.ell = 0;
  return state;
}

void inner_step(InnerDualState& state, const BarycentricInputs& inputs,
                const NewtonParams& params, int threads) {
  inputs.validate();
  const int workers = inputs.workers();
  if (static_cast<int>(state.us.size()) != workers)
    throw std::invalid_argument("inner_step: state/inputs worker mismatch");

  parallel_for_workers(workers, threads, [&](int i) {
    const VectorXd v = state.zs[i] - state.nutildes[i];
    state.us[i] =
        prox_f_newton(v, inputs.mus[i], *inputs.kernel, state.tau, params, state.us[i]).u;
  });

  // Coordinator: consensus projection of u + nutilde, then dual ascent.
  std::vector<VectorXd> shifted(workers);
  for (int i = 0; i < workers; ++i) shifted[i] = state.us[i] + state.nutildes[i];
  state.zs = project_consensus(shifted, state.target);
  for (int i = 0; i < workers; ++i) state.nutildes[i] += state.us[i] - state.zs[i];
  ++state.ell;
}

namespace {

ProbabilityVector recover_zeta(const VectorXd& u, const ProbabilityVector& mu,
                               const GibbsKernel& kernel) {
  const double eps = kernel.epsilon();
  if (kernel.mode() == KernelMode::LogDomain) {
    const VectorXd le = u / eps;
    const VectorXd lq = mu.values().array().log().matrix() - kernel.log_apply(le);
    VectorXd lzeta = le + kernel.log_apply(lq);
    lzeta.array() -= lzeta.maxCoeff();
    return ProbabilityVector::normalized(lzeta.array().exp());
  }
  const double shift = u.maxCoeff() / eps;
  const VectorXd e = ((u / eps).array() - shift).exp();
  const VectorXd ge = kernel.apply(e);
  check_positive_finite(ge, "run_inner (zeta recovery)");
  return ProbabilityVector::normalized(
      e.cwiseProduct(kernel.apply(mu.values().cwiseQuotient(ge))));
}

}  // namespace

InnerResult run_inner(const BarycentricInputs& inputs,
                      std::optional<InnerDualState> warm, int iters, double tau,
                      const NewtonParams& params, int threads) {
  inputs.validate();
  if (iters < 1) throw std::invalid_argument("run_inner: iters must be >= 1");
  if (!(tau > 0.0)) throw std::invalid_argument("run_inner: tau must be positive");

  InnerDualState state;
  if (warm) {
    state = std::move(*warm);
    if (static_cast<int>(state.us.size()) != inputs.workers())
      throw std::invalid_argument("run_inner: warm state worker mismatch");
    // nu_sum moved since the previous outer iteration; refresh the consensus
    // target and let the next z-update restore feasibility.
    state.target = inputs.target();
    state.tau = tau;
  } else {
    state = cold_start(inputs, tau);
  }

  for (int l = 0; l < iters; ++l) inner_step(state, inputs, params, threads);

  const int workers = inputs.workers();
  std::vector<ProbabilityVector> candidates;
  candidates.reserve(workers);
  for (int i = 0; i < workers; ++i)
    candidates.push_back(recover_zeta(state.us[i], inputs.mus[i], *inputs.kernel));

  double deviation = 0.0;
  for (int i = 0; i < workers; ++i)
    for (int j = i + 1; j < workers; ++j)
      deviation = std::max(deviation, (candidates[i].values() - candidates[j].values())
                                          .cwiseAbs()
                                          .maxCoeff());

  VectorXd mean = VectorXd::Zero(inputs.kernel->size());
  for (const auto& c : candidates) mean += c.values();
  InnerResult result{ProbabilityVector::normalized(mean), std::move(state), deviation};
  return result;
}

}  // namespace wadmm
