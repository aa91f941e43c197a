#include "copula/evaluate.hpp"

#include "copula/errors.hpp"
#include "copula/parallel.hpp"
#include "copula/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace copula {

namespace {

constexpr ColumnType kTypes[] = {ColumnType::Continuous, ColumnType::Binary, ColumnType::Ordinal};

std::vector<std::pair<std::string, double>> metric_values(const MetricReport& r) {
  std::vector<std::pair<std::string, double>> out;
  for (auto type : kTypes) {
    if (auto it = r.smae_by_type.find(type); it != r.smae_by_type.end())
      out.emplace_back("smae_" + to_string(type), it->second);
  }
  out.emplace_back("mae", r.mae);
  out.emplace_back("rmse", r.rmse);
  if (r.corr_rel_error) out.emplace_back("corr_rel_error", *r.corr_rel_error);
  // Zero means the imputations came from elsewhere; no fit to report.
  if (r.iterations > 0) out.emplace_back("iterations", r.iterations);
  return out;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string to_string(ColumnType type) {
  switch (type) {
    case ColumnType::Continuous:
      return "continuous";
    case ColumnType::Binary:
      return "binary";
    case ColumnType::Ordinal:
      return "ordinal";
  }
  return "unknown";
}

ColumnType column_type(const VariableKind& kind) {
  if (kind.is_continuous()) return ColumnType::Continuous;
  return kind.is_binary() ? ColumnType::Binary : ColumnType::Ordinal;
}

std::optional<double> smae(std::span<const double> imputed, std::span<const double> truth, double observed_median) {
  if (imputed.size() != truth.size() || truth.empty())
    throw InvalidArgument("SMAE needs equal-length non-empty vectors");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    num += std::abs(imputed[k] - truth[k]);
    den += std::abs(observed_median - truth[k]);
  }
  if (den == 0.0) return std::nullopt;
  return num / den;
}

double corr_rel_error(const CorrelationMatrix& estimate, const CorrelationMatrix& truth) {
  if (estimate.dim() != truth.dim()) throw InvalidArgument("correlation matrices differ in dimension");
  return (estimate.matrix() - truth.matrix()).norm() / truth.matrix().norm();
}

double observed_median(const MixedDataMatrix& data, Eigen::Index j) {
  auto v = data.observed_column(j);
  if (v.empty()) throw InvalidArgument("column '" + data.column_name(j) + "' has no observed values");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  if (data.kind(j).is_ordinal()) return v[n / 2 - 1];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

MetricReport score_imputation(const MixedDataMatrix& truth, const MixedDataMatrix& training,
                              const MixedDataMatrix& completed, const MaskMatrix& test_mask) {
  const auto p = truth.cols();
  MetricReport report;
  report.per_column_smae.assign(p, std::numeric_limits<double>::quiet_NaN());
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  std::map<ColumnType, std::pair<double, int>> by_type;

  for (Eigen::Index j = 0; j < p; ++j) {
    std::vector<double> imputed;
    std::vector<double> actual;
    for (Eigen::Index i = 0; i < truth.rows(); ++i) {
      if (!test_mask(i, j)) continue;
      if (!truth.observed(i, j)) throw InvalidArgument("test cell has no ground truth");
      imputed.push_back(completed.value(i, j));
      actual.push_back(truth.value(i, j));
    }
    if (imputed.empty()) continue;
    for (std::size_t k = 0; k < imputed.size(); ++k) {
      const double e = imputed[k] - actual[k];
      abs_sum += std::abs(e);
      sq_sum += e * e;
    }
    report.test_cells += imputed.size();
    const auto s = smae(imputed, actual, observed_median(training, j));
    if (!s) {
      report.warnings.push_back("SMAE undefined for column '" + truth.column_name(j) + "' (zero denominator)");
      continue;
    }
    report.per_column_smae[j] = *s;
    auto& acc = by_type[column_type(truth.kind(j))];
    acc.first += *s;
    acc.second += 1;
  }
  if (report.test_cells == 0) throw InvalidArgument("empty test set: no cells were held out");
  for (const auto& [type, acc] : by_type) report.smae_by_type[type] = acc.first / acc.second;
  report.mae = abs_sum / static_cast<double>(report.test_cells);
  report.rmse = std::sqrt(sq_sum / static_cast<double>(report.test_cells));
  return report;
}

std::vector<MetricReport> holdout_experiment(const MixedDataMatrix& data, double mask_ratio, int repeats,
                                             std::uint64_t seed, const HoldoutOptions& options) {
  if (repeats < 1) throw InvalidArgument("repeats must be at least 1");
  if (!(mask_ratio > 0.0)) throw InvalidArgument("empty test set: mask ratio must be positive");

  std::vector<MetricReport> reports(repeats);
  // Repeats run one after another; each fit already uses the configured threads.
  for (int r = 0; r < repeats; ++r) {
    auto& report = reports[r];
    try {
      const auto training = mask_mcar(data, mask_ratio, mix_seed(seed, static_cast<std::uint64_t>(r)));
      const MaskMatrix test = data.mask() && !training.mask();
      const auto model = fit(training, options.em);
      const auto imputed = impute(training, model, options.impute);
      report = score_imputation(data, training, imputed.completed, test);
      report.iterations = model.iterations;
      if (options.true_sigma) report.corr_rel_error = corr_rel_error(model.sigma, *options.true_sigma);
    } catch (const std::exception& e) {
      report = MetricReport{};
      report.error = e.what();
    }
  }
  return reports;
}

MetricSummary summarize(const std::vector<MetricReport>& reports) {
  MetricSummary summary;
  std::map<std::string, std::vector<double>> values;
  for (const auto& r : reports) {
    if (r.error) {
      ++summary.failures;
      continue;
    }
    for (const auto& [name, v] : metric_values(r)) values[name].push_back(v);
  }
  for (const auto& [name, vs] : values) {
    MetricSummary::Stat stat;
    stat.count = vs.size();
    for (double v : vs) stat.mean += v;
    stat.mean /= static_cast<double>(vs.size());
    if (vs.size() > 1) {
      double ss = 0.0;
      for (double v : vs) ss += (v - stat.mean) * (v - stat.mean);
      stat.sd = std::sqrt(ss / static_cast<double>(vs.size() - 1));
    }
    summary.metrics[name] = stat;
  }
  return summary;
}

std::string format_reports_csv(const std::vector<MetricReport>& reports) {
  std::vector<std::string> columns;
  for (const auto& r : reports) {
    for (const auto& [name, v] : metric_values(r)) {
      if (std::find(columns.begin(), columns.end(), name) == columns.end()) columns.push_back(name);
    }
  }
  std::string out = "repeat";
  for (const auto& c : columns) out += "," + c;
  out += ",error\n";
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto values = metric_values(reports[k]);
    out += std::to_string(k + 1);
    for (const auto& c : columns) {
      out += ",";
      if (reports[k].error) continue;
      for (const auto& [name, v] : values) {
        if (name == c) out += format_double(v);
      }
    }
    out += "," + csv_escape(reports[k].error.value_or("")) + "\n";
  }
  return out;
}

std::string format_summary_table(const MetricSummary& summary) {
  std::size_t width = 6;
  for (const auto& [name, stat] : summary.metrics) width = std::max(width, name.size());
  std::string out;
  for (const auto& [name, stat] : summary.metrics) {
    out += name + std::string(width - name.size() + 2, ' ') + fixed(stat.mean) + "(" + fixed(stat.sd) + ")\n";
  }
  if (summary.failures > 0) out += "failed repeats: " + std::to_string(summary.failures) + "\n";
  return out;
}

}  // namespace copula
