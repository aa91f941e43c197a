#pragma once

#include "copula/data_model.hpp"
#include "copula/em_engine.hpp"
#include "copula/imputer.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace copula {

enum class ColumnType { Continuous, Binary, Ordinal };

std::string to_string(ColumnType type);
ColumnType column_type(const VariableKind& kind);

struct MetricReport {
  /// Mean per-column SMAE over the columns of each type that have a defined
  /// SMAE; types without such columns are absent.
  std::map<ColumnType, double> smae_by_type;
  double mae = 0.0;
  double rmse = 0.0;
  std::optional<double> corr_rel_error;
  /// NaN where the column had no test cells or a zero denominator.
  std::vector<double> per_column_smae;
  std::size_t test_cells = 0;
  int iterations = 0;
  std::vector<std::string> warnings;
  /// Set when the repeat failed; the metrics are then meaningless.
  std::optional<std::string> error;
};

/// ||imputed - truth||_1 / ||median - truth||_1; empty when the denominator
/// is zero.
std::optional<double> smae(std::span<const double> imputed, std::span<const double> truth, double observed_median);

/// ||estimate - truth||_F / ||truth||_F.
double corr_rel_error(const CorrelationMatrix& estimate, const CorrelationMatrix& truth);

/// Median of the observed cells of column j. Ordinal columns use the lower
/// middle level when the count is even.
double observed_median(const MixedDataMatrix& data, Eigen::Index j);

/// Scores `completed` against `truth` on the cells flagged in `test_mask`;
/// medians come from the observed cells of `training`.
MetricReport score_imputation(const MixedDataMatrix& truth, const MixedDataMatrix& training,
                              const MixedDataMatrix& completed, const MaskMatrix& test_mask);

struct HoldoutOptions {
  EmConfig em;
  ImputeConfig impute;
  std::optional<CorrelationMatrix> true_sigma;
};

/// Per repeat: hide a further `mask_ratio` of the observed cells, fit,
/// impute, and score on the hidden cells. Failures are recorded in the
/// report rather than thrown.
std::vector<MetricReport> holdout_experiment(const MixedDataMatrix& data, double mask_ratio, int repeats,
                                             std::uint64_t seed, const HoldoutOptions& options = {});

struct MetricSummary {
  struct Stat {
    double mean = 0.0;
    double sd = 0.0;
    std::size_t count = 0;
  };
  std::map<std::string, Stat> metrics;
  std::size_t failures = 0;
};

/// Mean and sample standard deviation of each metric over successful repeats.
MetricSummary summarize(const std::vector<MetricReport>& reports);

/// One row per repeat: repeat, metric columns, error.
std::string format_reports_csv(const std::vector<MetricReport>& reports);
/// Aligned "metric  mean(sd)" table.
std::string format_summary_table(const MetricSummary& summary);

}  // namespace copula
