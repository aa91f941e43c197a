#pragma once

#include "copula/data_model.hpp"

#include <limits>
#include <span>
#include <variant>
#include <vector>

namespace copula {

/// Half-open latent interval (lower, upper]; either end may be infinite.
struct LatentInterval {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  bool contains(double z) const { return z > lower && z <= upper; }
  static LatentInterval whole_line() { return {}; }
};

/// Empirical-CDF marginal of a continuous column.
class ContinuousMarginal {
 public:
  ContinuousMarginal() = default;
  /// Throws DegenerateColumnError with fewer than two distinct values.
  explicit ContinuousMarginal(std::span<const double> observed);

  const std::vector<double>& sorted_observed() const { return sorted_; }
  std::size_t n_obs() const { return sorted_.size(); }

  /// Phi^{-1}(#{obs <= x} / (n + 1)), floored at mass 1/(n + 1).
  double to_latent(double x) const;
  /// Empirical quantile at Phi(z), linear between order statistics.
  double from_latent(double z) const;
  /// Quantile at probability u in [0, 1].
  double quantile(double u) const;

 private:
  std::vector<double> sorted_;
};

/// Cutoff marginal of an ordinal column with k levels (k - 1 thresholds).
class OrdinalMarginal {
 public:
  OrdinalMarginal() = default;
  /// Takes cutoffs directly; they must be finite and strictly increasing.
  explicit OrdinalMarginal(std::vector<double> cutoffs);

  const std::vector<double>& cutoffs() const { return cutoffs_; }
  int level_count() const { return static_cast<int>(cutoffs_.size()) + 1; }

  /// 1 + #{cutoffs strictly below z}.
  int apply(double z) const;
  /// (c_{level-1}, c_level] with infinite sentinels.
  LatentInterval interval(int level) const;

 private:
  std::vector<double> cutoffs_;
};

ContinuousMarginal fit_continuous(std::span<const double> observed);
double to_latent_continuous(const ContinuousMarginal& m, double x);
double from_latent_continuous(const ContinuousMarginal& m, double z);

/// Cutoffs Phi^{-1}(#{obs <= l} / (n + 1)) for l = 1..k-1.
/// Throws UnobservedLevelError if a level in 1..k has no observations.
OrdinalMarginal fit_ordinal(std::span<const double> observed_levels, int level_count);
int cutoff_apply(const OrdinalMarginal& m, double z);
LatentInterval latent_interval(const OrdinalMarginal& m, int level);

using MarginalModel = std::variant<ContinuousMarginal, OrdinalMarginal>;

/// Fits every column of `data` according to its kind. Errors name the column.
std::vector<MarginalModel> fit_marginals(const MixedDataMatrix& data);

/// Latent point for an observed continuous cell.
double to_latent(const MarginalModel& m, double x);
/// Maps a latent value back to the data scale (level index for ordinals).
double from_latent(const MarginalModel& m, double z);
VariableKind kind_of(const MarginalModel& m);

}  // namespace copula
