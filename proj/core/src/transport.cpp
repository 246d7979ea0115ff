#include "wadmm/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace wadmm {

namespace {

void check_marginal(const MatrixXd& m, const VectorXd& target, bool rows, double tol,
                    const char* what) {
  VectorXd sums = rows ? VectorXd(m.rowwise().sum()) : VectorXd(m.colwise().sum());
  const double err = (sums - target).cwiseAbs().maxCoeff();
  if (err > tol)
    throw std::invalid_argument(std::string("TransportPlan: ") + what +
                                " marginal deviates by " + std::to_string(err));
}

}  // namespace

TransportPlan::TransportPlan(MatrixXd m, ProbabilityVector row, ProbabilityVector col)
    : matrix(std::move(m)), row_marginal(std::move(row)), col_marginal(std::move(col)) {
  if (matrix.rows() != row_marginal.size() || matrix.cols() != col_marginal.size())
    throw std::invalid_argument("TransportPlan: size mismatch");
  if ((matrix.array() < 0.0).any())
    throw std::invalid_argument("TransportPlan: negative entry");
  check_marginal(matrix, row_marginal.values(), true, 1e-8, "row");
  check_marginal(matrix, col_marginal.values(), false, 1e-8, "column");
}

double plan_objective(const MatrixXd& plan, const CostMatrix& C, double epsilon) {
  if (plan.rows() != C.size() || plan.cols() != C.size())
    throw std::invalid_argument("plan_objective: size mismatch");
  double v = 0.0;
  for (int i = 0; i < plan.rows(); ++i)
    for (int j = 0; j < plan.cols(); ++j) {
      const double m = plan(i, j);
      if (m > 0.0) v += m * (0.5 * C(i, j) + epsilon * std::log(m));
    }
  return v;
}

SinkhornResult sinkhorn_divergence(const ProbabilityVector& mu,
                                   const ProbabilityVector& zeta,
                                   const GibbsKernel& kernel,
                                   int max_sweeps, double tol) {
  const int n = kernel.size();
  if (mu.size() != n || zeta.size() != n)
    throw std::invalid_argument("sinkhorn_divergence: size mismatch");
  if ((mu.values().array() <= 0.0).any() || (zeta.values().array() <= 0.0).any())
    throw std::invalid_argument("sinkhorn_divergence: marginals must be strictly positive");
  if (max_sweeps < 1) throw std::invalid_argument("sinkhorn_divergence: max_sweeps < 1");

  const bool log_mode = kernel.mode() == KernelMode::LogDomain;
  const VectorXd log_mu = mu.values().array().log();
  const VectorXd log_zeta = zeta.values().array().log();

  VectorXd ly = VectorXd::Zero(n), lz = VectorXd::Zero(n);
  VectorXd y = VectorXd::Ones(n), z = VectorXd::Ones(n);
  double err = std::numeric_limits<double>::infinity();
  int sweeps = 0;
  for (; sweeps < max_sweeps; ++sweeps) {
    if (log_mode) {
      ly = log_mu - kernel.log_apply(lz);
      lz = log_zeta - kernel.log_apply(ly);
      err = ((ly + kernel.log_apply(lz)).array().exp() - mu.values().array())
                .abs()
                .maxCoeff();
    } else {
      y = mu.values().cwiseQuotient(kernel.apply(z));
      z = zeta.values().cwiseQuotient(kernel.apply(y));
      if (!y.allFinite() || !z.allFinite())
        throw std::runtime_error(
            "sinkhorn_divergence: scaling factors left the finite range in "
            "direct mode; use log_domain mode");
      err = (y.cwiseProduct(kernel.apply(z)) - mu.values()).cwiseAbs().maxCoeff();
    }
    if (err <= tol) {
      ++sweeps;
      break;
    }
  }

  if (log_mode) {
    y = ly.array().exp();
    z = lz.array().exp();
  } else {
    ly = y.array().log();
    lz = z.array().log();
  }
  MatrixXd plan(n, n);
  double value = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double lm = ly[i] + kernel.log_gamma()(i, j) + lz[j];
      const double m = std::isfinite(lm) ? std::exp(lm) : 0.0;
      plan(i, j) = m;
      // <C/2 + eps log M, M> with C/2 = -eps log Gamma; the log Gamma parts
      // cancel on the support and M = 0 entries contribute nothing.
      if (m > 0.0) value += m * kernel.epsilon() * (ly[i] + lz[j]);
    }

  SinkhornResult result{
      value,
      TransportPlan(std::move(plan), mu, zeta),
      DualFactors{std::move(y), std::move(z)},
      sweeps,
      err,
      err <= tol};
  return result;
}

namespace {

// Successive shortest paths with node potentials on the dense bipartite
// transportation graph. Supplies are real-valued; each augmentation saturates
// a source, a sink, or empties a flow-carrying arc.
class TransportationSsp {
 public:
  TransportationSsp(const VectorXd& supply, const VectorXd& demand, const MatrixXd& cost)
      : n_(static_cast<int>(supply.size())),
        cost_(cost),
        rs_(supply),
        rd_(demand),
        pi_(VectorXd::Zero(2 * static_cast<int>(supply.size()))),
        in_flow_(supply.size()) {}

  double solve() {
    const double mass_tol = 1e-14;
    const long max_augmentations = 64L * n_ + 128;
    long augmentations = 0;
    while (rs_.maxCoeff() > mass_tol && rd_.maxCoeff() > mass_tol) {
      if (++augmentations > max_augmentations)
        throw std::runtime_error("exact_wasserstein: augmentation cap exceeded");
      augment();
    }
    double total = 0.0;
    for (int j = 0; j < n_; ++j)
      for (const auto& [i, f] : in_flow_[j]) total += f * cost_(i, j);
    return total;
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  void augment() {
    const int V = 2 * n_;
    std::vector<double> dist(V, kInf);
    std::vector<int> parent(V, -1);
    std::vector<char> done(V, 0);
    for (int i = 0; i < n_; ++i)
      if (rs_[i] > 0.0) dist[i] = 0.0;

    int target = -1;
    while (true) {
      int u = -1;
      double best = kInf;
      for (int v = 0; v < V; ++v)
        if (!done[v] && dist[v] < best) {
          best = dist[v];
          u = v;
        }
      if (u < 0) break;
      done[u] = 1;
      if (u >= n_ && rd_[u - n_] > 0.0) {
        target = u;
        break;
      }
      if (u < n_) {
        // forward arcs source u -> every sink
        const double du = dist[u];
        for (int j = 0; j < n_; ++j) {
          const int v = n_ + j;
          if (done[v]) continue;
          const double rc = std::max(0.0, cost_(u, j) + pi_[u] - pi_[v]);
          if (du + rc < dist[v]) {
            dist[v] = du + rc;
            parent[v] = u;
          }
        }
      } else {
        // backward arcs along flow-carrying pairs
        const int j = u - n_;
        const double du = dist[u];
        for (const auto& [i, f] : in_flow_[j]) {
          if (done[i] || f <= 0.0) continue;
          const double rc = std::max(0.0, -cost_(i, j) + pi_[u] - pi_[i]);
          if (du + rc < dist[i]) {
            dist[i] = du + rc;
            parent[i] = u;
          }
        }
      }
    }
    if (target < 0)
      throw std::runtime_error("exact_wasserstein: no augmenting path (marginals invalid)");

    const double d_target = dist[target];
    for (int v = 0; v < V; ++v) pi_[v] += std::min(dist[v], d_target);

    // walk back to the originating source, collecting (source, sink) hops
    std::vector<std::pair<int, int>> forward_arcs, backward_arcs;
    int v = target;
    while (parent[v] >= 0) {
      const int u = parent[v];
      if (u < n_)
        forward_arcs.emplace_back(u, v - n_);
      else
        backward_arcs.emplace_back(v, u - n_);
      v = u;
    }
    const int origin = v;

    double delta = std::min(rs_[origin], rd_[target - n_]);
    for (const auto& [i, j] : backward_arcs) delta = std::min(delta, flow(i, j));
    for (const auto& [i, j] : forward_arcs) add_flow(i, j, delta);
    for (const auto& [i, j] : backward_arcs) add_flow(i, j, -delta);

    rs_[origin] = clamp_mass(rs_[origin] - delta);
    rd_[target - n_] = clamp_mass(rd_[target - n_] - delta);
  }

  static double clamp_mass(double m) { return m <= 1e-15 ? 0.0 : m; }

  double flow(int i, int j) const {
    for (const auto& [s, f] : in_flow_[j])
      if (s == i) return f;
    return 0.0;
  }

  void add_flow(int i, int j, double delta) {
    auto& arcs = in_flow_[j];
    for (auto it = arcs.begin(); it != arcs.end(); ++it) {
      if (it->first != i) continue;
      it->second += delta;
      if (it->second <= 1e-15) arcs.erase(it);
      return;
    }
    if (delta > 0.0) arcs.emplace_back(i, delta);
  }

  int n_;
  const MatrixXd& cost_;
  VectorXd rs_, rd_;
  VectorXd pi_;
  std::vector<std::vector<std::pair<int, double>>> in_flow_;
};

}  // namespace

double exact_wasserstein(const ProbabilityVector& mu, const ProbabilityVector& zeta,
                         const CostMatrix& C) {
  const int n = C.size();
  if (mu.size() != n || zeta.size() != n)
    throw std::invalid_argument("exact_wasserstein: size mismatch");
  // Rescale so both sides carry exactly matching total mass.
  VectorXd supply = mu.values() / mu.values().sum();
  VectorXd demand = zeta.values() / zeta.values().sum();
  TransportationSsp ssp(supply, demand, C.entries());
  return ssp.solve();
}

}  // namespace wadmm
