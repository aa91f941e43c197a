#include "copula/normal.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <limits>

namespace copula::normal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInvSqrt2 = 0.70710678118654752440;

// Asymptotic expansion of log(1 - Phi(x)) for x >= 30, where erfc would
// underflow. Truncation error is below 1e-12 relative at x = 30.
double log_upper_tail_asymptotic(double x) {
  const double inv2 = 1.0 / (x * x);
  double term = 1.0;
  double series = 1.0;
  for (int k = 1; k <= 5; ++k) {
    term *= -(2.0 * k - 1.0) * inv2;
    series += term;
  }
  return log_pdf(x) - std::log(x) + std::log(series);
}

const boost::math::normal_distribution<double>& standard() {
  static const boost::math::normal_distribution<double> dist(0.0, 1.0);
  return dist;
}

}  // namespace

double pdf(double x) {
  if (std::isinf(x)) return 0.0;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double log_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double upper_tail(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double log_upper_tail(double x) {
  if (x == kInf) return -kInf;
  if (x == -kInf) return 0.0;
  if (x < -5.0) return std::log1p(-upper_tail(-x));
  if (x < 30.0) return std::log(upper_tail(x));
  return log_upper_tail_asymptotic(x);
}

double log_cdf(double x) { return log_upper_tail(-x); }

double quantile(double p) {
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  return boost::math::quantile(standard(), p);
}

double upper_quantile(double q) {
  if (q <= 0.0) return kInf;
  if (q >= 1.0) return -kInf;
  return boost::math::quantile(boost::math::complement(standard(), q));
}

}  // namespace copula::normal
