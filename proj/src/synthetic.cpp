#include "copula/synthetic.hpp"

#include "copula/errors.hpp"
#include "copula/linalg.hpp"
#include "copula/normal.hpp"
#include "copula/parallel.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace copula {

namespace {
constexpr int kMaskAttempts = 100;
}

SyntheticSpec SyntheticSpec::mixed_thirds(Eigen::Index n, int p, double missing_ratio, std::uint64_t seed,
                                          int levels) {
  SyntheticSpec spec;
  spec.n = n;
  spec.missing_ratio = missing_ratio;
  spec.seed = seed;
  const int cont = p / 3 + (p % 3 > 0 ? 1 : 0);
  const int bin = p / 3 + (p % 3 > 1 ? 1 : 0);
  for (int j = 0; j < p; ++j) {
    if (j < cont) {
      spec.columns.push_back(SyntheticMarginal::exponential());
    } else if (j < cont + bin) {
      spec.columns.push_back(SyntheticMarginal::binary());
    } else {
      spec.columns.push_back(SyntheticMarginal::ordinal(levels));
    }
  }
  return spec;
}

std::vector<double> cutoffs_for(const SyntheticMarginal& column) {
  const int k = column.level_count();
  if (k < 1) throw InvalidArgument("ordinal column needs at least one level");
  std::vector<double> masses = column.masses;
  if (masses.empty()) masses.assign(k, 1.0 / k);
  if (static_cast<int>(masses.size()) != k) throw InvalidArgument("mass vector length must equal level count");
  if (std::abs(std::accumulate(masses.begin(), masses.end(), 0.0) - 1.0) > 1e-9)
    throw InvalidArgument("level masses must sum to 1");
  std::vector<double> cutoffs;
  double cumulative = 0.0;
  for (int l = 0; l + 1 < k; ++l) {
    if (!(masses[l] > 0.0)) throw InvalidArgument("level masses must be positive");
    cumulative += masses[l];
    cutoffs.push_back(normal::quantile(cumulative));
  }
  return cutoffs;
}

CorrelationMatrix random_correlation(int p, std::uint64_t seed) {
  if (p < 1) throw InvalidArgument("dimension must be at least 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd a(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) a(i, j) = gauss(rng);
  }
  return project_elliptope(a * a.transpose());
}

SyntheticData generate(const CorrelationMatrix& sigma, const SyntheticSpec& spec) {
  const auto p = static_cast<Eigen::Index>(spec.columns.size());
  if (sigma.dim() != p) throw InvalidArgument("correlation dimension does not match the column count");
  if (spec.n < 1) throw InvalidArgument("need at least one row");

  const Eigen::MatrixXd chol = psd_cholesky(sigma.matrix(), 1e-10);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd latent(spec.n, p);
  Eigen::VectorXd eps(p);
  for (Eigen::Index i = 0; i < spec.n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) eps(j) = gauss(rng);
    latent.row(i) = (chol * eps).transpose();
  }

  SyntheticData out;
  Eigen::MatrixXd values(spec.n, p);
  std::vector<VariableKind> kinds;
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto& col = spec.columns[j];
    names.push_back("V" + std::to_string(j + 1));
    if (col.is_continuous()) {
      if (!(col.rate > 0.0)) throw InvalidArgument("exponential rate must be positive");
      kinds.push_back(VariableKind::continuous());
      out.cutoffs.emplace_back();
      // F^{-1}(Phi(z)) = -log(1 - Phi(z)) / rate.
      for (Eigen::Index i = 0; i < spec.n; ++i)
        values(i, j) = -normal::log_upper_tail(latent(i, j)) / col.rate;
      continue;
    }
    auto cutoffs = cutoffs_for(col);
    const OrdinalMarginal marginal(cutoffs);
    kinds.push_back(VariableKind::ordinal(col.level_count()));
    for (Eigen::Index i = 0; i < spec.n; ++i) values(i, j) = marginal.apply(latent(i, j));
    out.cutoffs.push_back(std::move(cutoffs));
  }
  out.complete = MixedDataMatrix(std::move(values), MaskMatrix::Constant(spec.n, p, true), std::move(kinds),
                                 std::move(names));
  out.latent = std::move(latent);
  return out;
}

MixedDataMatrix mask_mcar(const MixedDataMatrix& data, double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio < 1.0)) throw InvalidArgument("missing ratio must lie in [0, 1)");
  MaskMatrix mask = data.mask();
  if (ratio == 0.0) return data.with_mask(mask);

  std::bernoulli_distribution hide(ratio);
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    std::set<double> levels_before;
    if (data.kind(j).is_ordinal()) {
      for (Eigen::Index i = 0; i < data.rows(); ++i)
        if (data.observed(i, j)) levels_before.insert(data.value(i, j));
    }
    const bool had_any = data.observed_count(j) > 0;

    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(j)));
    bool ok = false;
    for (int attempt = 0; attempt < kMaskAttempts && !ok; ++attempt) {
      std::set<double> levels_after;
      Eigen::Index kept = 0;
      for (Eigen::Index i = 0; i < data.rows(); ++i) {
        const bool was = data.observed(i, j);
        const bool drop = hide(rng);
        mask(i, j) = was && !drop;
        if (mask(i, j)) {
          ++kept;
          if (data.kind(j).is_ordinal()) levels_after.insert(data.value(i, j));
        }
      }
      ok = (!had_any || kept > 0) && levels_after.size() == levels_before.size();
    }
    if (!ok)
      throw InvalidArgument("cannot keep column '" + data.column_name(j) +
                            "' observable at missing ratio " + format_double(ratio) + "; use a lower ratio");
  }
  return data.with_mask(mask);
}

}  // namespace copula
