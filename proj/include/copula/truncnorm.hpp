#pragma once

#include "copula/marginals.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace copula {

struct UnivariateTruncMoments {
  double mean = 0.0;
  double variance = 0.0;
  /// True when the interval carried too little mass to evaluate the ratios
  /// and the endpoint fallback was used.
  bool degenerate = false;
};

/// Mean and variance of N(mu, sigma2) truncated to (a, b].
///
/// Ratios phi/Phi are formed in log space from complementary tails, so
/// one-sided intervals far into either tail stay finite. When the relative
/// mass of the interval is below 1e-12 the result falls back to the point of
/// [a, b] nearest mu with zero variance.
UnivariateTruncMoments univariate_moments(double mu, double sigma2, double a, double b);

inline UnivariateTruncMoments univariate_moments(double mu, double sigma2, const LatentInterval& iv) {
  return univariate_moments(mu, sigma2, iv.lower, iv.upper);
}

/// One draw from N(mu, sigma2) truncated to (a, b] by inverse CDF on the
/// tail nearest the interval.
double sample_truncated(double mu, double sigma2, double a, double b, std::mt19937_64& rng);

enum class UpdateMode { GaussSeidel, Jacobi };

/// Latent normal vector over a row's observed dimensions: some coordinates
/// are known points (continuous cells), the rest are confined to intervals
/// (ordinal cells). Holds the current mean estimate of every interval
/// coordinate and the precision matrix of `sigma`.
class TruncatedBoxProblem {
 public:
  /// `intervals[d]` is empty for a known coordinate, whose value is taken
  /// from `point[d]`; for an interval coordinate `point[d]` is the current
  /// mean estimate.
  TruncatedBoxProblem(Eigen::MatrixXd sigma, Eigen::VectorXd point,
                      std::vector<std::optional<LatentInterval>> intervals, double ridge = 1e-8);

  Eigen::Index size() const { return point_.size(); }
  const Eigen::MatrixXd& sigma() const { return sigma_; }
  const Eigen::MatrixXd& precision() const { return precision_; }
  const Eigen::VectorXd& point() const { return point_; }
  const std::vector<int>& interval_dims() const { return interval_dims_; }
  const LatentInterval& interval(int d) const { return *intervals_[d]; }
  bool ridge_applied() const { return ridge_applied_; }

  /// Mean and variance of coordinate d given all others at their current
  /// values: (mu~_d, sigma~_d^2).
  std::pair<double, double> conditional(int d) const;
  /// Same, with the other coordinates taken from `point`.
  std::pair<double, double> conditional(int d, const Eigen::VectorXd& point) const;

  void set_estimate(int d, double value);

  /// One pass over the interval coordinates in ascending order. Returns the
  /// truncated variances (diagonal approximation, zero on known dims) and
  /// updates the mean estimates.
  Eigen::VectorXd sweep(UpdateMode mode);

 private:
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd precision_;
  Eigen::VectorXd point_;
  std::vector<std::optional<LatentInterval>> intervals_;
  std::vector<int> interval_dims_;
  bool ridge_applied_ = false;
};

/// g_j: truncated mean of coordinate j given the others at their estimates.
double conditional_mean_update(const TruncatedBoxProblem& problem, int j);
/// h_j: truncated variance of coordinate j given the others at their
/// estimates; the spread of g_j itself is not added.
double conditional_var_update(const TruncatedBoxProblem& problem, int j);

/// Gibbs draw of the interval coordinates, started from the current mean
/// estimates. Output is ordered as `problem.interval_dims()`.
Eigen::VectorXd sample_truncated_row(const TruncatedBoxProblem& problem, int sweeps, std::uint64_t seed);
Eigen::VectorXd sample_truncated_row(const TruncatedBoxProblem& problem, int sweeps, std::mt19937_64& rng);

}  // namespace copula
