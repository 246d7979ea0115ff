#pragma once

#include <Eigen/Core>
#include <ostream>
#include <string>
#include <vector>

namespace wadmm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Positivity floor applied before renormalizing any constructed density.
// Downstream log/division machinery requires strictly positive entries.
constexpr double kDensityFloor = 1e-300;

// Largest exponent magnitude a direct-mode Gibbs kernel accepts; beyond
// this, exp(-C/2eps) is not representable and log-domain mode is required.
constexpr double kDirectModeExponentLimit = 700.0;

struct AxisBounds {
  double lo;
  double hi;
};

// Uniform tensor-product grid of N = prod(counts) samples in R^d.
// Points are ordered lexicographically by axis index (last axis fastest),
// so matrix indexing and CSV output are deterministic.
class SampleSet {
 public:
  SampleSet(MatrixXd points, std::vector<AxisBounds> bounds, std::vector<int> counts);

  int size() const { return static_cast<int>(points_.rows()); }
  int dim() const { return static_cast<int>(points_.cols()); }
  const MatrixXd& points() const { return points_; }
  Eigen::RowVectorXd point(int i) const { return points_.row(i); }
  const std::vector<AxisBounds>& bounds() const { return bounds_; }
  const std::vector<int>& counts() const { return counts_; }
  double spacing(int axis) const;

 private:
  MatrixXd points_;  // N x d
  std::vector<AxisBounds> bounds_;
  std::vector<int> counts_;
};

SampleSet make_uniform_grid(const std::vector<AxisBounds>& bounds,
                            const std::vector<int>& counts);

// Point on the probability simplex over a fixed sample set: entries >= 0,
// sum within 1e-9 of one. Immutable after construction.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(VectorXd values);

  // Floors at kDensityFloor and renormalizes; result is strictly positive.
  static ProbabilityVector normalized(VectorXd values);

  int size() const { return static_cast<int>(values_.size()); }
  const VectorXd& values() const { return values_; }
  double operator[](int i) const { return values_[i]; }

 private:
  ProbabilityVector() = default;
  VectorXd values_;
};

// Squared Euclidean distance matrix of a sample set: symmetric, zero diagonal.
class CostMatrix {
 public:
  explicit CostMatrix(MatrixXd entries);

  int size() const { return static_cast<int>(entries_.rows()); }
  const MatrixXd& entries() const { return entries_; }
  double operator()(int i, int j) const { return entries_(i, j); }
  double max_entry() const { return entries_.maxCoeff(); }

 private:
  MatrixXd entries_;
};

CostMatrix cost_matrix(const SampleSet& samples);

enum class KernelMode { Direct, LogDomain };

// Gibbs kernel Gamma = exp(-C/2eps). Direct mode works with the dense kernel
// and errors out when a positivity-critical application underflows; log-domain
// mode stores -C/2eps and routes those applications through row-wise
// log-sum-exp. Both modes keep the dense matrix for sign-indefinite products
// (Hessian actions), where entries below DBL_MIN are negligible rather than
// catastrophic.
class GibbsKernel {
 public:
  static GibbsKernel from_cost(const CostMatrix& C, double epsilon, KernelMode mode);
  // Direct construction for limit cases (e.g. Gamma = I); validates the
  // kernel invariants but not the exp(-C/2eps) relation.
  static GibbsKernel from_gamma(MatrixXd gamma, double epsilon);

  int size() const { return static_cast<int>(gamma_.rows()); }
  double epsilon() const { return epsilon_; }
  KernelMode mode() const { return mode_; }
  const MatrixXd& gamma() const { return gamma_; }
  const MatrixXd& log_gamma() const { return log_gamma_; }

  // Plain product Gamma * v (v may be signed).
  VectorXd apply(const VectorXd& v) const { return gamma_ * v; }

  // log(Gamma * exp(log_v)). Direct mode evaluates the product and throws if
  // it loses positivity; log-domain mode uses a stabilized log-sum-exp.
  VectorXd log_apply(const VectorXd& log_v) const;

 private:
  GibbsKernel(MatrixXd gamma, MatrixXd log_gamma, double epsilon, KernelMode mode);
  MatrixXd gamma_;
  MatrixXd log_gamma_;
  double epsilon_;
  KernelMode mode_;
};

GibbsKernel gibbs_kernel(const CostMatrix& C, double epsilon, KernelMode mode);

// Mixture of Gaussians with shared SPD covariance, evaluated pointwise at the
// samples, floored and renormalized to the simplex.
ProbabilityVector gaussian_mixture(const SampleSet& samples,
                                   const std::vector<VectorXd>& means,
                                   const MatrixXd& cov,
                                   const VectorXd& weights);

// CSV schema shared by all measure output: header x1,..,xd,prob; one row per
// sample; 17 significant digits.
void write_measure_csv(std::ostream& os, const SampleSet& samples,
                       const ProbabilityVector& prob);
void write_measure_csv(const std::string& path, const SampleSet& samples,
                       const ProbabilityVector& prob);

// %.17g rendering used for all byte-stable numeric output.
std::string format_double(double v);

}  // namespace wadmm
