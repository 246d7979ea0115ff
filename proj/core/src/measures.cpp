#include "wadmm/measures.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace wadmm {

SampleSet::SampleSet(MatrixXd points, std::vector<AxisBounds> bounds,
                     std::vector<int> counts)
    : points_(std::move(points)), bounds_(std::move(bounds)), counts_(std::move(counts)) {
  if (bounds_.size() != counts_.size())
    throw std::invalid_argument("SampleSet: bounds/counts dimension mismatch");
  long expected = 1;
  for (int c : counts_) expected *= c;
  if (points_.rows() != expected)
    throw std::invalid_argument("SampleSet: point count does not match counts product");
  if (points_.cols() != static_cast<long>(bounds_.size()))
    throw std::invalid_argument("SampleSet: point dimension does not match bounds");
}

double SampleSet::spacing(int axis) const {
  const AxisBounds& b = bounds_.at(axis);
  return (b.hi - b.lo) / (counts_.at(axis) - 1);
}

SampleSet make_uniform_grid(const std::vector<AxisBounds>& bounds,
                            const std::vector<int>& counts) {
  if (bounds.empty() || bounds.size() != counts.size())
    throw std::invalid_argument("make_uniform_grid: need matching, nonempty bounds and counts");
  const int d = static_cast<int>(bounds.size());
  long n = 1;
  for (int a = 0; a < d; ++a) {
    if (counts[a] < 2)
      throw std::invalid_argument("make_uniform_grid: counts must be >= 2 per axis");
    if (!(bounds[a].lo < bounds[a].hi))
      throw std::invalid_argument("make_uniform_grid: degenerate interval (lo >= hi)");
    n *= counts[a];
  }
  MatrixXd pts(n, d);
  std::vector<int> idx(d, 0);
  for (long r = 0; r < n; ++r) {
    for (int a = 0; a < d; ++a) {
      const double t = static_cast<double>(idx[a]) / (counts[a] - 1);
      pts(r, a) = bounds[a].lo + t * (bounds[a].hi - bounds[a].lo);
    }
    // lexicographic increment, last axis fastest
    for (int a = d - 1; a >= 0; --a) {
      if (++idx[a] < counts[a]) break;
      idx[a] = 0;
    }
  }
  return SampleSet(std::move(pts), bounds, counts);
}

ProbabilityVector::ProbabilityVector(VectorXd values) : values_(std::move(values)) {
  if (values_.size() == 0)
    throw std::invalid_argument("ProbabilityVector: empty");
  if ((values_.array() < 0.0).any())
    throw std::invalid_argument("ProbabilityVector: negative entry");
  if (!values_.allFinite())
    throw std::invalid_argument("ProbabilityVector: non-finite entry");
  const double s = values_.sum();
  if (std::abs(s - 1.0) > 1e-9)
    throw std::invalid_argument("ProbabilityVector: sum deviates from 1 by " +
                                std::to_string(s - 1.0));
}

ProbabilityVector ProbabilityVector::normalized(VectorXd values) {
  if (values.size() == 0)
    throw std::invalid_argument("ProbabilityVector::normalized: empty");
  if (!values.allFinite())
    throw std::invalid_argument("ProbabilityVector::normalized: non-finite entry");
  if ((values.array() < 0.0).any())
    throw std::invalid_argument("ProbabilityVector::normalized: negative entry");
  values = values.cwiseMax(kDensityFloor);
  const double s = values.sum();
  if (!(s > 0.0) || !std::isfinite(s))
    throw std::invalid_argument("ProbabilityVector::normalized: mass is not positive finite");
  ProbabilityVector pv;
  pv.values_ = values / s;
  return pv;
}

CostMatrix::CostMatrix(MatrixXd entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols())
    throw std::invalid_argument("CostMatrix: not square");
  for (int i = 0; i < entries_.rows(); ++i) {
    if (entries_(i, i) != 0.0)
      throw std::invalid_argument("CostMatrix: nonzero diagonal");
    for (int j = i + 1; j < entries_.cols(); ++j) {
      if (entries_(i, j) != entries_(j, i))
        throw std::invalid_argument("CostMatrix: not symmetric");
      if (entries_(i, j) < 0.0)
        throw std::invalid_argument("CostMatrix: negative entry");
    }
  }
}

CostMatrix cost_matrix(const SampleSet& samples) {
  const int n = samples.size();
  MatrixXd C(n, n);
  for (int i = 0; i < n; ++i) {
    C(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      const double d2 = (samples.points().row(i) - samples.points().row(j)).squaredNorm();
      C(i, j) = d2;
      C(j, i) = d2;  // mirrored, so symmetry is bitwise
    }
  }
  return CostMatrix(std::move(C));
}

GibbsKernel::GibbsKernel(MatrixXd gamma, MatrixXd log_gamma, double epsilon, KernelMode mode)
    : gamma_(std::move(gamma)), log_gamma_(std::move(log_gamma)), epsilon_(epsilon), mode_(mode) {}

GibbsKernel GibbsKernel::from_cost(const CostMatrix& C, double epsilon, KernelMode mode) {
  if (!(epsilon > 0.0))
    throw std::invalid_argument("GibbsKernel: epsilon must be positive");
  const double max_exponent = C.max_entry() / (2.0 * epsilon);
  if (mode == KernelMode::Direct && max_exponent >= kDirectModeExponentLimit)
    throw std::runtime_error(
        "GibbsKernel: max(C)/(2*eps) = " + std::to_string(max_exponent) +
        " exceeds the direct-mode representable range; use log_domain mode");
  MatrixXd log_gamma = -C.entries() / (2.0 * epsilon);
  MatrixXd gamma = log_gamma.array().exp().matrix();
  return GibbsKernel(std::move(gamma), std::move(log_gamma), epsilon, mode);
}

GibbsKernel GibbsKernel::from_gamma(MatrixXd gamma, double epsilon) {
  if (!(epsilon > 0.0))
    throw std::invalid_argument("GibbsKernel: epsilon must be positive");
  if (gamma.rows() != gamma.cols())
    throw std::invalid_argument("GibbsKernel: gamma not square");
  for (int i = 0; i < gamma.rows(); ++i) {
    if (gamma(i, i) != 1.0)
      throw std::invalid_argument("GibbsKernel: gamma diagonal must be 1");
    for (int j = 0; j < gamma.cols(); ++j) {
      if (!(gamma(i, j) >= 0.0 && gamma(i, j) <= 1.0))
        throw std::invalid_argument("GibbsKernel: gamma entries must lie in [0,1]");
      if (gamma(i, j) != gamma(j, i))
        throw std::invalid_argument("GibbsKernel: gamma not symmetric");
    }
  }
  MatrixXd log_gamma = gamma.array().log().matrix();  // -inf where gamma == 0
  return GibbsKernel(std::move(gamma), std::move(log_gamma), epsilon, KernelMode::Direct);
}

GibbsKernel gibbs_kernel(const CostMatrix& C, double epsilon, KernelMode mode) {
  return GibbsKernel::from_cost(C, epsilon, mode);
}

VectorXd GibbsKernel::log_apply(const VectorXd& log_v) const {
  const int n = size();
  if (log_v.size() != n)
    throw std::invalid_argument("GibbsKernel::log_apply: size mismatch");
  if (mode_ == KernelMode::Direct) {
    VectorXd r = gamma_ * log_v.array().exp().matrix();
    for (int i = 0; i < n; ++i) {
      if (!(r[i] > 0.0) || !std::isfinite(r[i]))
        throw std::runtime_error(
            "GibbsKernel::log_apply: kernel application left the positive range "
            "in direct mode; use log_domain mode");
    }
    return r.array().log().matrix();
  }
  VectorXd out(n);
  VectorXd row(n);
  for (int i = 0; i < n; ++i) {
    row = log_gamma_.row(i).transpose() + log_v;
    const double m = row.maxCoeff();
    if (!std::isfinite(m)) {  // entire row is -inf
      out[i] = m;
      continue;
    }
    out[i] = m + std::log((row.array() - m).exp().sum());
  }
  return out;
}

ProbabilityVector gaussian_mixture(const SampleSet& samples,
                                   const std::vector<VectorXd>& means,
                                   const MatrixXd& cov,
                                   const VectorXd& weights) {
  const int d = samples.dim();
  if (means.empty() || static_cast<int>(means.size()) != weights.size())
    throw std::invalid_argument("gaussian_mixture: means/weights size mismatch");
  if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("gaussian_mixture: weights must lie on the simplex");
  if (cov.rows() != d || cov.cols() != d)
    throw std::invalid_argument("gaussian_mixture: covariance dimension mismatch");
  Eigen::LLT<MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("gaussian_mixture: covariance is not SPD");

  const int n = samples.size();
  VectorXd density = VectorXd::Zero(n);
  VectorXd diff(d);
  for (size_t k = 0; k < means.size(); ++k) {
    if (means[k].size() != d)
      throw std::invalid_argument("gaussian_mixture: mean dimension mismatch");
    for (int i = 0; i < n; ++i) {
      diff = samples.points().row(i).transpose() - means[k];
      const double q = diff.dot(llt.solve(diff));
      density[i] += weights[k] * std::exp(-0.5 * q);
    }
  }
  // The shared normalization constant cancels in the renormalization.
  return ProbabilityVector::normalized(std::move(density));
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_measure_csv(std::ostream& os, const SampleSet& samples,
                       const ProbabilityVector& prob) {
  if (prob.size() != samples.size())
    throw std::invalid_argument("write_measure_csv: size mismatch");
  const int d = samples.dim();
  for (int a = 0; a < d; ++a) os << 'x' << (a + 1) << ',';
  os << "prob\n";
  for (int i = 0; i < samples.size(); ++i) {
    for (int a = 0; a < d; ++a) os << format_double(samples.points()(i, a)) << ',';
    os << format_double(prob[i]) << '\n';
  }
}

void write_measure_csv(const std::string& path, const SampleSet& samples,
                       const ProbabilityVector& prob) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_measure_csv: cannot open " + path);
  write_measure_csv(os, samples, prob);
  if (!os) throw std::runtime_error("write_measure_csv: write failed for " + path);
}

}  // namespace wadmm
