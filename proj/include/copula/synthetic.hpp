#pragma once

#include "copula/data_model.hpp"
#include "copula/em_engine.hpp"

#include <cstdint>
#include <vector>

namespace copula {

/// Marginal family of one synthetic column.
struct SyntheticMarginal {
  enum class Family { Exponential, Binary, Ordinal };

  Family family = Family::Exponential;
  double rate = 1.0;
  int levels = 2;
  /// Optional level probabilities (must sum to 1); equiprobable when empty.
  std::vector<double> masses;

  static SyntheticMarginal exponential(double rate = 1.0) { return {Family::Exponential, rate, 0, {}}; }
  static SyntheticMarginal binary() { return {Family::Binary, 1.0, 2, {}}; }
  static SyntheticMarginal ordinal(int k, std::vector<double> masses = {}) {
    return {Family::Ordinal, 1.0, k, std::move(masses)};
  }

  int level_count() const { return family == Family::Binary ? 2 : levels; }
  bool is_continuous() const { return family == Family::Exponential; }
};

struct SyntheticSpec {
  Eigen::Index n = 2000;
  std::vector<SyntheticMarginal> columns;
  double missing_ratio = 0.0;
  std::uint64_t seed = 0;

  /// `p` columns split into thirds: exponential(1), binary, ordinal(levels).
  static SyntheticSpec mixed_thirds(Eigen::Index n, int p, double missing_ratio, std::uint64_t seed, int levels = 5);
};

struct SyntheticData {
  MixedDataMatrix complete;
  Eigen::MatrixXd latent;
  /// True cutoffs per column (empty for continuous columns).
  std::vector<std::vector<double>> cutoffs;
};

/// Normalized Gram matrix of a p x p standard-normal draw.
CorrelationMatrix random_correlation(int p, std::uint64_t seed);

/// Draws rows of z ~ N(0, sigma) and maps them through the column families.
SyntheticData generate(const CorrelationMatrix& sigma, const SyntheticSpec& spec);

/// Hides each observed cell independently with probability `ratio`. Every
/// column keeps at least one observed cell and all of the ordinal levels it
/// had; a column is redrawn up to 100 times before giving up.
MixedDataMatrix mask_mcar(const MixedDataMatrix& data, double ratio, std::uint64_t seed);

/// Cutoffs at cumulative masses (equiprobable when `masses` is empty).
std::vector<double> cutoffs_for(const SyntheticMarginal& column);

}  // namespace copula
