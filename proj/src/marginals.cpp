#include "copula/marginals.hpp"

#include "copula/errors.hpp"
#include "copula/normal.hpp"

#include <algorithm>
#include <cmath>

namespace copula {

namespace {
// Positions within this distance of an integer are treated as landing on the
// order statistic, so from_latent(to_latent(x)) returns observed x exactly.
constexpr double kPositionSnap = 1e-8;
}  // namespace

ContinuousMarginal::ContinuousMarginal(std::span<const double> observed)
    : sorted_(observed.begin(), observed.end()) {
  std::sort(sorted_.begin(), sorted_.end());
  if (sorted_.size() < 2 || sorted_.front() == sorted_.back())
    throw DegenerateColumnError("continuous column needs at least two distinct observed values");
}

double ContinuousMarginal::to_latent(double x) const {
  const auto n = static_cast<double>(sorted_.size());
  const auto count = static_cast<double>(std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin());
  return normal::quantile(std::max(count, 1.0) / (n + 1.0));
}

double ContinuousMarginal::quantile(double u) const {
  const auto n = sorted_.size();
  double h = u * static_cast<double>(n + 1);
  if (const double r = std::round(h); std::abs(h - r) < kPositionSnap) h = r;
  if (h <= 1.0) return sorted_.front();
  if (h >= static_cast<double>(n)) return sorted_.back();
  const double lo = std::floor(h);
  const auto k = static_cast<std::size_t>(lo);
  const double w = h - lo;
  if (w == 0.0) return sorted_[k - 1];
  return sorted_[k - 1] + w * (sorted_[k] - sorted_[k - 1]);
}

double ContinuousMarginal::from_latent(double z) const { return quantile(normal::cdf(z)); }

OrdinalMarginal::OrdinalMarginal(std::vector<double> cutoffs) : cutoffs_(std::move(cutoffs)) {
  for (std::size_t l = 0; l < cutoffs_.size(); ++l) {
    if (!std::isfinite(cutoffs_[l])) throw InvalidArgument("ordinal cutoffs must be finite");
    if (l > 0 && !(cutoffs_[l] > cutoffs_[l - 1]))
      throw InvalidArgument("ordinal cutoffs must be strictly increasing");
  }
}

int OrdinalMarginal::apply(double z) const {
  return 1 + static_cast<int>(std::lower_bound(cutoffs_.begin(), cutoffs_.end(), z) - cutoffs_.begin());
}

LatentInterval OrdinalMarginal::interval(int level) const {
  if (level < 1 || level > level_count())
    throw InvalidArgument("level " + std::to_string(level) + " outside 1.." + std::to_string(level_count()));
  LatentInterval out;
  if (level > 1) out.lower = cutoffs_[level - 2];
  if (level < level_count()) out.upper = cutoffs_[level - 1];
  return out;
}

ContinuousMarginal fit_continuous(std::span<const double> observed) { return ContinuousMarginal(observed); }

double to_latent_continuous(const ContinuousMarginal& m, double x) { return m.to_latent(x); }

double from_latent_continuous(const ContinuousMarginal& m, double z) { return m.from_latent(z); }

OrdinalMarginal fit_ordinal(std::span<const double> observed_levels, int level_count) {
  if (level_count < 1) throw InvalidArgument("level count must be at least 1");
  std::vector<std::size_t> counts(level_count, 0);
  for (double v : observed_levels) {
    const auto l = static_cast<long>(v);
    if (static_cast<double>(l) != v || l < 1 || l > level_count)
      throw InvalidArgument("observed level " + format_double(v) + " outside 1.." + std::to_string(level_count));
    ++counts[l - 1];
  }
  for (int l = 0; l < level_count; ++l) {
    if (counts[l] == 0) throw UnobservedLevelError("level " + std::to_string(l + 1) + " is never observed");
  }
  const auto denom = static_cast<double>(observed_levels.size()) + 1.0;
  std::vector<double> cutoffs;
  std::size_t cumulative = 0;
  for (int l = 0; l + 1 < level_count; ++l) {
    cumulative += counts[l];
    cutoffs.push_back(normal::quantile(static_cast<double>(cumulative) / denom));
  }
  return OrdinalMarginal(std::move(cutoffs));
}

int cutoff_apply(const OrdinalMarginal& m, double z) { return m.apply(z); }

LatentInterval latent_interval(const OrdinalMarginal& m, int level) { return m.interval(level); }

std::vector<MarginalModel> fit_marginals(const MixedDataMatrix& data) {
  std::vector<MarginalModel> out;
  out.reserve(data.cols());
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    const auto observed = data.observed_column(j);
    try {
      if (data.kind(j).is_continuous()) {
        out.emplace_back(fit_continuous(observed));
      } else {
        out.emplace_back(fit_ordinal(observed, data.kind(j).level_count));
      }
    } catch (const DegenerateColumnError& e) {
      throw DegenerateColumnError("column '" + data.column_name(j) + "': " + e.what());
    } catch (const UnobservedLevelError& e) {
      throw UnobservedLevelError("column '" + data.column_name(j) + "': " + e.what());
    } catch (const Error& e) {
      throw InvalidArgument("column '" + data.column_name(j) + "': " + e.what());
    }
  }
  return out;
}

double to_latent(const MarginalModel& m, double x) {
  return std::visit(
      [x](const auto& model) -> double {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, ContinuousMarginal>) {
          return model.to_latent(x);
        } else {
          throw InvalidArgument("ordinal cells have no point latent value");
        }
      },
      m);
}

double from_latent(const MarginalModel& m, double z) {
  return std::visit(
      [z](const auto& model) -> double {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, ContinuousMarginal>) {
          return model.from_latent(z);
        } else {
          return static_cast<double>(model.apply(z));
        }
      },
      m);
}

VariableKind kind_of(const MarginalModel& m) {
  if (const auto* o = std::get_if<OrdinalMarginal>(&m)) return VariableKind::ordinal(o->level_count());
  return VariableKind::continuous();
}

}  // namespace copula
