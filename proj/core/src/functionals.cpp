#include "wadmm/functionals.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace wadmm {

namespace {

constexpr double kTinyBase = 1e-300;

double rel_change(const VectorXd& now, const VectorXd& before) {
  double r = 0.0;
  for (int i = 0; i < now.size(); ++i)
    r = std::max(r, std::abs(now[i] - before[i]) / std::max(std::abs(before[i]), kTinyBase));
  return r;
}

double rel_change_log(const VectorXd& lnow, const VectorXd& lbefore) {
  double r = 0.0;
  for (int i = 0; i < lnow.size(); ++i)
    r = std::max(r, std::abs(std::expm1(lnow[i] - lbefore[i])));
  return r;
}

void check_positive_finite(const VectorXd& v, const char* where) {
  for (int i = 0; i < v.size(); ++i)
    if (!(v[i] > 0.0) || !std::isfinite(v[i]))
      throw std::runtime_error(std::string(where) +
                               ": kernel application left the positive range in "
                               "direct mode; use log_domain mode");
}

ProbabilityVector mu_from_log(VectorXd log_mu) {
  log_mu.array() -= log_mu.maxCoeff();
  return ProbabilityVector::normalized(log_mu.array().exp());
}

}  // namespace

void FreeEnergyFunctional::validate(int n) const {
  if (drift.size() != n)
    throw std::invalid_argument("FreeEnergyFunctional: drift size mismatch");
  if (interaction) {
    if (interaction->rows() != n || interaction->cols() != n)
      throw std::invalid_argument("FreeEnergyFunctional: interaction size mismatch");
    if (!interaction->isApprox(interaction->transpose(), 0.0))
      throw std::invalid_argument("FreeEnergyFunctional: interaction not symmetric");
  }
  if (internal != InternalEnergy::None && !(beta > 0.0))
    throw std::invalid_argument("FreeEnergyFunctional: beta must be positive");
  if (internal == InternalEnergy::PowerLaw && power_m != 2)
    throw std::invalid_argument("FreeEnergyFunctional: only m = 2 power law is supported");
}

double FreeEnergyFunctional::value(const VectorXd& mu) const {
  double v = drift.dot(mu);
  if (interaction) v += mu.dot((*interaction) * mu);
  switch (internal) {
    case InternalEnergy::None:
      break;
    case InternalEnergy::LogEntropy: {
      double s = 0.0;
      for (int i = 0; i < mu.size(); ++i)
        if (mu[i] > 0.0) s += mu[i] * std::log(mu[i]);
      v += s / beta;
      break;
    }
    case InternalEnergy::PowerLaw:
      v += mu.squaredNorm() / beta;
      break;
  }
  return v;
}

void ProxParams::validate() const {
  if (!(alpha > 0.0) || !(delta > 0.0) || max_sweeps < 1)
    throw std::invalid_argument("ProxParams: alpha, delta must be positive and max_sweeps >= 1");
}

VectorXd effective_drift(const FreeEnergyFunctional& f, const VectorXd& nu,
                         const ProbabilityVector& mu_prev) {
  const int n = mu_prev.size();
  f.validate(n);
  if (nu.size() != n) throw std::invalid_argument("effective_drift: nu size mismatch");
  VectorXd a = f.drift + nu;
  if (f.interaction) a += (*f.interaction) * mu_prev.values();
  return a;
}

ProxResult prox_linear(const VectorXd& a, const ProbabilityVector& zeta,
                       const GibbsKernel& kernel, double alpha) {
  const int n = kernel.size();
  if (a.size() != n || zeta.size() != n)
    throw std::invalid_argument("prox_linear: size mismatch");
  if (!(alpha > 0.0)) throw std::invalid_argument("prox_linear: alpha must be positive");
  if (!a.allFinite()) throw std::invalid_argument("prox_linear: non-finite drift");
  if ((zeta.values().array() <= 0.0).any())
    throw std::invalid_argument("prox_linear: zeta must be strictly positive");
  const double ae = alpha * kernel.epsilon();

  if (kernel.mode() == KernelMode::LogDomain) {
    const VectorXd lz = -a / ae;
    const VectorXd ly = zeta.values().array().log().matrix() - kernel.log_apply(lz);
    const VectorXd lgy = kernel.log_apply(ly);
    ProxResult r{mu_from_log(lz + lgy),
                 DualFactors{ly.array().exp(), lz.array().exp()},
                 0, 0.0, true, {}};
    return r;
  }

  const VectorXd z = (-a / ae).array().exp();
  const VectorXd gz = kernel.apply(z);
  check_positive_finite(gz, "prox_linear");
  const VectorXd y = zeta.values().cwiseQuotient(gz);
  const VectorXd raw = z.cwiseProduct(kernel.apply(y));
  if (!raw.allFinite())
    throw std::runtime_error("prox_linear: overflow in direct mode; use log_domain mode");
  ProxResult r{ProbabilityVector::normalized(raw), DualFactors{y, z}, 0, 0.0, true, {}};
  return r;
}

ProxResult prox_log_entropy(double beta, const VectorXd& a, const ProbabilityVector& zeta,
                            const GibbsKernel& kernel, const ProxParams& params) {
  const int n = kernel.size();
  params.validate();
  if (!(beta > 0.0)) throw std::invalid_argument("prox_log_entropy: beta must be positive");
  if (a.size() != n || zeta.size() != n)
    throw std::invalid_argument("prox_log_entropy: size mismatch");
  if ((zeta.values().array() <= 0.0).any())
    throw std::invalid_argument("prox_log_entropy: zeta must be strictly positive");

  const double ae = params.alpha * kernel.epsilon();
  const double c = 1.0 / (1.0 + beta * ae);
  const VectorXd lpre = -c * (beta * a.array() + 1.0);
  const VectorXd lzeta = zeta.values().array().log();
  const bool log_mode = kernel.mode() == KernelMode::LogDomain;

  VectorXd lz = VectorXd::Zero(n), ly(n), lgy(n);
  VectorXd z = VectorXd::Ones(n), y(n), gy(n);
  bool have_y = false;
  ProxResult result{ProbabilityVector::normalized(VectorXd::Ones(n)),
                    DualFactors{}, 0, std::numeric_limits<double>::infinity(),
                    false, {}};
  for (int sweep = 0; sweep < params.max_sweeps; ++sweep) {
    double r;
    if (log_mode) {
      const VectorXd ly_new = lzeta - kernel.log_apply(lz);
      lgy = kernel.log_apply(ly_new);
      const VectorXd lz_new = lpre - c * lgy;
      r = rel_change_log(lz_new, lz);
      if (have_y) r = std::max(r, rel_change_log(ly_new, ly));
      ly = ly_new;
      lz = lz_new;
    } else {
      const VectorXd gz = kernel.apply(z);
      check_positive_finite(gz, "prox_log_entropy");
      const VectorXd y_new = zeta.values().cwiseQuotient(gz);
      gy = kernel.apply(y_new);
      check_positive_finite(gy, "prox_log_entropy");
      const VectorXd z_new = (lpre - c * gy.array().log()).exp();
      if (!z_new.allFinite())
        throw std::runtime_error(
            "prox_log_entropy: overflow in direct mode; use log_domain mode");
      r = rel_change(z_new, z);
      if (have_y) r = std::max(r, rel_change(y_new, y));
      y = y_new;
      z = z_new;
    }
    have_y = true;
    result.sweep_residuals.push_back(r);
    result.sweeps = sweep + 1;
    result.residual = r;
    if (r <= params.delta) {
      result.converged = true;
      break;
    }
  }

  // mu = z .* (Gamma^T y) with the y that produced the final z, so the
  // stationarity equation for z holds by construction; delta controls the
  // remaining zeta-equation residual.
  if (log_mode) {
    result.mu = mu_from_log(lz + lgy);
    result.factors = DualFactors{ly.array().exp(), lz.array().exp()};
  } else {
    result.mu = ProbabilityVector::normalized(z.cwiseProduct(gy));
    result.factors = DualFactors{y, z};
  }
  return result;
}

namespace {

// Unique positive root of  exp(t + s) + p t + q = 0  in t = ln z. The left
// side is strictly increasing and convex, so a bracketed Newton iteration is
// globally safe.
double solve_power_law_coordinate(double s, double p, double q, double t0) {
  auto g = [&](double t) {
    const double e = t + s;
    return (e > kDirectModeExponentLimit ? std::numeric_limits<double>::infinity()
                                         : std::exp(e)) +
           p * t + q;
  };
  double lo, hi;
  double t = std::isfinite(t0) ? t0 : 0.0;
  double step = 1.0;
  if (g(t) > 0.0) {
    hi = t;
    lo = t - step;
    while (g(lo) > 0.0) {
      hi = lo;
      step *= 2.0;
      lo -= step;
      if (step > 1e18) throw std::runtime_error("power-law root: bracketing failed (low)");
    }
  } else {
    lo = t;
    hi = t + step;
    while (g(hi) <= 0.0) {
      lo = hi;
      step *= 2.0;
      hi += step;
      if (step > 1e18) throw std::runtime_error("power-law root: bracketing failed (high)");
    }
  }
  // Bisect until the bracket is tight enough for Newton and g(hi) is finite.
  for (int it = 0; it < 200 && (hi - lo > 1.0 || !std::isfinite(g(hi))); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  // g is convex increasing and g(hi) >= 0, so Newton from hi descends
  // monotonically onto the root.
  t = hi;
  for (int it = 0; it < 80; ++it) {
    const double gt = g(t);
    const double gp = std::exp(t + s) + p;
    const double dt = gt / gp;
    t -= dt;
    if (std::abs(dt) <= 1e-15 * (1.0 + std::abs(t))) break;
  }
  return t;
}

}  // namespace

ProxResult prox_power_law(double beta, const VectorXd& a, const ProbabilityVector& zeta,
                          const GibbsKernel& kernel, const ProxParams& params) {
  const int n = kernel.size();
  params.validate();
  if (!(beta > 0.0)) throw std::invalid_argument("prox_power_law: beta must be positive");
  if (a.size() != n || zeta.size() != n)
    throw std::invalid_argument("prox_power_law: size mismatch");
  if ((zeta.values().array() <= 0.0).any())
    throw std::invalid_argument("prox_power_law: zeta must be strictly positive");

  const double ae = params.alpha * kernel.epsilon();
  const double p = 0.5 * beta * ae;
  const VectorXd q = 0.5 * beta * a;
  const VectorXd lzeta = zeta.values().array().log();
  const bool log_mode = kernel.mode() == KernelMode::LogDomain;

  VectorXd lz = VectorXd::Zero(n), ly(n), lw(n);
  bool have_y = false;
  ProxResult result{ProbabilityVector::normalized(VectorXd::Ones(n)),
                    DualFactors{}, 0, std::numeric_limits<double>::infinity(),
                    false, {}};
  for (int sweep = 0; sweep < params.max_sweeps; ++sweep) {
    VectorXd ly_new(n);
    if (log_mode) {
      ly_new = lzeta - kernel.log_apply(lz);
      lw = kernel.log_apply(ly_new);
    } else {
      const VectorXd gz = kernel.apply(lz.array().exp().matrix());
      std::ostringstream bad;
      int bad_count = 0;
      for (int i = 0; i < n; ++i)
        if (!(gz[i] > 0.0) || !std::isfinite(gz[i])) {
          if (bad_count < 8) bad << (bad_count ? "," : "") << i;
          ++bad_count;
        }
      if (bad_count)
        throw std::runtime_error(
            "prox_power_law: iterate left the positive cone at coordinates [" +
            bad.str() + "]; use log_domain mode or adjust parameters");
      ly_new = lzeta - gz.array().log().matrix();
      const VectorXd w = kernel.apply(ly_new.array().exp().matrix());
      check_positive_finite(w, "prox_power_law");
      lw = w.array().log();
    }
    VectorXd lz_new(n);
    for (int j = 0; j < n; ++j)
      lz_new[j] = solve_power_law_coordinate(lw[j], p, q[j], lz[j]);
    double r = rel_change_log(lz_new, lz);
    if (have_y) r = std::max(r, rel_change_log(ly_new, ly));
    ly = ly_new;
    lz = lz_new;
    have_y = true;
    result.sweep_residuals.push_back(r);
    result.sweeps = sweep + 1;
    result.residual = r;
    if (r <= params.delta) {
      result.converged = true;
      break;
    }
  }

  result.mu = mu_from_log(lz + lw);
  result.factors = DualFactors{ly.array().exp(), lz.array().exp()};
  return result;
}

ProxResult prox(const FreeEnergyFunctional& f, const VectorXd& nu,
                const ProbabilityVector& mu_prev, const ProbabilityVector& zeta,
                const GibbsKernel& kernel, const ProxParams& params) {
  const VectorXd a = effective_drift(f, nu, mu_prev);
  switch (f.internal) {
    case InternalEnergy::None:
      return prox_linear(a, zeta, kernel, params.alpha);
    case InternalEnergy::LogEntropy:
      return prox_log_entropy(f.beta, a, zeta, kernel, params);
    case InternalEnergy::PowerLaw:
      return prox_power_law(f.beta, a, zeta, kernel, params);
  }
  throw std::logic_error("prox: unknown internal energy");
}

namespace {

double eval_with_stencil(const ScalarField& f, const VectorXd& point, double h) {
  const double direct = f(point);
  if (std::isfinite(direct)) return direct;
  const int d = static_cast<int>(point.size());
  const int steps = 5;
  std::vector<int> idx(d, 0);
  const long total = static_cast<long>(std::pow(steps, d));
  double sum = 0.0;
  long used = 0;
  VectorXd probe(d);
  for (long r = 0; r < total; ++r) {
    for (int a = 0; a < d; ++a)
      probe[a] = point[a] + (-h + idx[a] * (2.0 * h / (steps - 1)));
    const double v = f(probe);
    if (std::isfinite(v)) {
      sum += v;
      ++used;
    }
    for (int a = d - 1; a >= 0; --a) {
      if (++idx[a] < steps) break;
      idx[a] = 0;
    }
  }
  if (used == 0)
    throw std::runtime_error("discretize_potentials: stencil found no finite values");
  return sum / static_cast<double>(used);
}

}  // namespace

VectorXd discretize_drift(const ScalarField& V, const SampleSet& samples, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("discretize_drift: h must be positive");
  const int n = samples.size();
  VectorXd drift(n);
  for (int j = 0; j < n; ++j)
    drift[j] = eval_with_stencil(V, samples.point(j).transpose(), h);
  return drift;
}

MatrixXd discretize_interaction(const ScalarField& U, const SampleSet& samples, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("discretize_interaction: h must be positive");
  const int n = samples.size();
  MatrixXd inter(n, n);
  // All diagonal differences are the zero vector; evaluate its (possibly
  // stencil-averaged) value once.
  const double at_zero =
      eval_with_stencil(U, VectorXd::Zero(samples.dim()), h);
  for (int i = 0; i < n; ++i) {
    inter(i, i) = at_zero;
    for (int j = i + 1; j < n; ++j) {
      const VectorXd diff = (samples.point(i) - samples.point(j)).transpose();
      const double v = eval_with_stencil(U, diff, h);
      inter(i, j) = v;
      inter(j, i) = v;
    }
  }
  return inter;
}

std::pair<VectorXd, MatrixXd> discretize_potentials(const ScalarField& V,
                                                    const ScalarField& U,
                                                    const SampleSet& samples, double h) {
  return {discretize_drift(V, samples, h), discretize_interaction(U, samples, h)};
}

}  // namespace wadmm
