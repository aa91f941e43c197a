#pragma once

// Standard normal density, distribution and quantile functions with
// tail-stable variants used by the truncated-moment code.

namespace copula::normal {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double pdf(double x);
double log_pdf(double x);

/// Phi(x).
double cdf(double x);
/// 1 - Phi(x), accurate for large positive x.
double upper_tail(double x);
/// log(1 - Phi(x)); finite for every finite x.
double log_upper_tail(double x);
/// log Phi(x); finite for every finite x.
double log_cdf(double x);

/// Phi^{-1}(p) for p in (0, 1); returns -inf / +inf at 0 / 1.
double quantile(double p);
/// Phi^{-1}(1 - q), evaluated without forming 1 - q.
double upper_quantile(double q);

}  // namespace copula::normal
