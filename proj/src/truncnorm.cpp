#include "copula/truncnorm.hpp"

#include "copula/errors.hpp"
#include "copula/linalg.hpp"
#include "copula/normal.hpp"

#include <algorithm>
#include <cmath>

namespace copula {

namespace {

constexpr double kMinRelativeMass = 1e-12;

// log of the interval mass Phi(beta) - Phi(alpha), and that mass relative to
// the larger of the two tails it is computed from.
struct IntervalMass {
  double log_mass;
  double relative;
};

IntervalMass interval_mass(double alpha, double beta) {
  if (alpha >= 0.0) {
    const double la = normal::log_upper_tail(alpha);
    const double lb = normal::log_upper_tail(beta);
    const double rel = -std::expm1(lb - la);
    return {la + std::log(rel), rel};
  }
  if (beta <= 0.0) {
    const double la = normal::log_cdf(alpha);
    const double lb = normal::log_cdf(beta);
    const double rel = -std::expm1(la - lb);
    return {lb + std::log(rel), rel};
  }
  const double mass = 1.0 - normal::upper_tail(beta) - normal::cdf(alpha);
  return {std::log(mass), mass};
}

}  // namespace

UnivariateTruncMoments univariate_moments(double mu, double sigma2, double a, double b) {
  if (!(sigma2 > 0.0)) throw InvalidArgument("truncated normal needs positive variance");
  if (!(a < b)) throw InvalidArgument("truncation interval must satisfy a < b");

  const double s = std::sqrt(sigma2);
  const double alpha = (a - mu) / s;
  const double beta = (b - mu) / s;
  const auto mass = interval_mass(alpha, beta);
  if (!(mass.relative >= kMinRelativeMass) || !std::isfinite(mass.log_mass)) {
    return {std::clamp(mu, a, b), 0.0, true};
  }

  const double ra = std::isfinite(alpha) ? std::exp(normal::log_pdf(alpha) - mass.log_mass) : 0.0;
  const double rb = std::isfinite(beta) ? std::exp(normal::log_pdf(beta) - mass.log_mass) : 0.0;
  const double ta = std::isfinite(alpha) ? alpha * ra : 0.0;
  const double tb = std::isfinite(beta) ? beta * rb : 0.0;
  const double shift = ra - rb;

  UnivariateTruncMoments out;
  out.mean = std::clamp(mu + s * shift, a, b);
  out.variance = std::clamp(sigma2 * (1.0 + ta - tb - shift * shift), 0.0, sigma2);
  return out;
}

double sample_truncated(double mu, double sigma2, double a, double b, std::mt19937_64& rng) {
  const double s = std::sqrt(sigma2);
  const double alpha = (a - mu) / s;
  const double beta = (b - mu) / s;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double x;
  if (alpha >= 0.0) {
    const double qa = normal::upper_tail(alpha);
    const double qb = normal::upper_tail(beta);
    if (!(qa > qb)) return univariate_moments(mu, sigma2, a, b).mean;
    x = normal::upper_quantile(qb + u * (qa - qb));
  } else if (beta <= 0.0) {
    const double pa = normal::cdf(alpha);
    const double pb = normal::cdf(beta);
    if (!(pb > pa)) return univariate_moments(mu, sigma2, a, b).mean;
    x = normal::quantile(pa + u * (pb - pa));
  } else {
    const double pa = normal::cdf(alpha);
    const double pb = normal::cdf(beta);
    x = normal::quantile(pa + u * (pb - pa));
  }
  const double z = mu + s * x;
  if (z <= a) return std::nextafter(a, b);
  return std::min(z, b);
}

TruncatedBoxProblem::TruncatedBoxProblem(Eigen::MatrixXd sigma, Eigen::VectorXd point,
                                         std::vector<std::optional<LatentInterval>> intervals, double ridge)
    : sigma_(std::move(sigma)), point_(std::move(point)), intervals_(std::move(intervals)) {
  const auto p = point_.size();
  if (sigma_.rows() != p || sigma_.cols() != p || static_cast<Eigen::Index>(intervals_.size()) != p)
    throw InvalidArgument("truncated box problem: dimension mismatch");
  for (Eigen::Index d = 0; d < p; ++d) {
    if (!(sigma_(d, d) > 0.0)) throw InvalidArgument("truncated box problem: non-positive diagonal");
    if (intervals_[d]) interval_dims_.push_back(static_cast<int>(d));
  }
  auto inv = spd_inverse(sigma_, ridge);
  precision_ = std::move(inv.inverse);
  ridge_applied_ = inv.ridge_applied;
}

std::pair<double, double> TruncatedBoxProblem::conditional(int d) const { return conditional(d, point_); }

std::pair<double, double> TruncatedBoxProblem::conditional(int d, const Eigen::VectorXd& point) const {
  // For z ~ N(0, S) with K = S^{-1}: E[z_d | z_-d] = -sum_{k != d} K_dk z_k / K_dd
  // and Var[z_d | z_-d] = 1 / K_dd.
  const double kdd = precision_(d, d);
  const double dot = precision_.row(d).dot(point) - kdd * point(d);
  return {-dot / kdd, 1.0 / kdd};
}

void TruncatedBoxProblem::set_estimate(int d, double value) {
  if (!intervals_[d]) throw InvalidArgument("cannot set the estimate of a known coordinate");
  point_(d) = value;
}

Eigen::VectorXd TruncatedBoxProblem::sweep(UpdateMode mode) {
  Eigen::VectorXd variances = Eigen::VectorXd::Zero(size());
  const Eigen::VectorXd previous = point_;
  for (int d : interval_dims_) {
    const auto [mu, var] = mode == UpdateMode::Jacobi ? conditional(d, previous) : conditional(d);
    const auto m = univariate_moments(mu, var, *intervals_[d]);
    point_(d) = m.mean;
    variances(d) = m.variance;
  }
  return variances;
}

double conditional_mean_update(const TruncatedBoxProblem& problem, int j) {
  const auto [mu, var] = problem.conditional(j);
  return univariate_moments(mu, var, problem.interval(j)).mean;
}

double conditional_var_update(const TruncatedBoxProblem& problem, int j) {
  const auto [mu, var] = problem.conditional(j);
  return univariate_moments(mu, var, problem.interval(j)).variance;
}

Eigen::VectorXd sample_truncated_row(const TruncatedBoxProblem& problem, int sweeps, std::mt19937_64& rng) {
  if (sweeps < 1) throw InvalidArgument("Gibbs sampler needs at least one sweep");
  Eigen::VectorXd z = problem.point();
  const auto& dims = problem.interval_dims();
  for (int s = 0; s < sweeps; ++s) {
    for (int d : dims) {
      const auto [mu, var] = problem.conditional(d, z);
      const auto& iv = problem.interval(d);
      z(d) = sample_truncated(mu, var, iv.lower, iv.upper, rng);
    }
  }
  Eigen::VectorXd out(dims.size());
  for (std::size_t k = 0; k < dims.size(); ++k) out(k) = z(dims[k]);
  return out;
}

Eigen::VectorXd sample_truncated_row(const TruncatedBoxProblem& problem, int sweeps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_truncated_row(problem, sweeps, rng);
}

}  // namespace copula
