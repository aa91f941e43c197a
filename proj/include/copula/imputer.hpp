#pragma once

#include "copula/data_model.hpp"
#include "copula/em_engine.hpp"

#include <cstdint>
#include <vector>

namespace copula {

struct ImputeConfig {
  UpdateMode update_mode = UpdateMode::GaussSeidel;
  double ridge = 1e-8;
  /// Truncated-moment sweeps per row at the fitted sigma, stopping early
  /// once the ordinal means move less than `sweep_tol`.
  int max_sweeps = 100;
  double sweep_tol = 1e-8;
  /// Gibbs sweeps per draw for multiple imputation.
  int gibbs_sweeps = 20;
  int threads = 1;
};

struct ImputationResult {
  /// Input with every cell filled; mask is all true.
  MixedDataMatrix completed;
  /// True where a cell was imputed.
  MaskMatrix imputed_mask;
  /// Latent vector behind each completed row (conditional mean or draw).
  Eigen::MatrixXd latent;
  /// Rows with no observed cells, imputed from the prior.
  std::vector<Eigen::Index> unobserved_rows;
};

struct MultipleImputationResult {
  std::vector<ImputationResult> draws;
  std::uint64_t seed = 0;
};

/// Conditional-mean imputation through the fitted marginals.
ImputationResult impute(const MixedDataMatrix& data, const FitResult& model, const ImputeConfig& config = {});

/// `m` completions by conditional sampling; reproducible from `seed`
/// regardless of thread count.
MultipleImputationResult impute_multiple(const MixedDataMatrix& data, const FitResult& model, int m,
                                         std::uint64_t seed, const ImputeConfig& config = {});

/// Throws InvalidArgument unless `data` has the column count and kinds the
/// model was fitted on.
void check_compatible(const MixedDataMatrix& data, const FitResult& model);

}  // namespace copula
