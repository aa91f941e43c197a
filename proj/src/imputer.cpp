#include "copula/imputer.hpp"

#include "copula/errors.hpp"
#include "copula/linalg.hpp"
#include "copula/parallel.hpp"

#include <random>

namespace copula {

namespace {

MixedDataMatrix fill(const MixedDataMatrix& data, const Eigen::MatrixXd& latent, const FitResult& model,
                     MaskMatrix& imputed) {
  Eigen::MatrixXd values = data.values();
  imputed = MaskMatrix::Constant(data.rows(), data.cols(), false);
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      if (data.observed(i, j)) continue;
      values(i, j) = from_latent(model.marginals[j], latent(i, j));
      imputed(i, j) = true;
    }
  }
  return data.with_values(std::move(values), MaskMatrix::Constant(data.rows(), data.cols(), true));
}

std::vector<Eigen::Index> empty_rows(const std::vector<RowObservation>& rows) {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].observed.empty()) out.push_back(static_cast<Eigen::Index>(i));
  }
  return out;
}

}  // namespace

void check_compatible(const MixedDataMatrix& data, const FitResult& model) {
  if (static_cast<Eigen::Index>(model.marginals.size()) != data.cols() || model.sigma.dim() != data.cols())
    throw InvalidArgument("data has " + std::to_string(data.cols()) + " columns, model has " +
                          std::to_string(model.marginals.size()));
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    if (kind_of(model.marginals[j]) != data.kind(j))
      throw InvalidArgument("column '" + data.column_name(j) + "' is " + to_string(data.kind(j)) +
                            " but the model expects " + to_string(kind_of(model.marginals[j])));
  }
}

ImputationResult impute(const MixedDataMatrix& data, const FitResult& model, const ImputeConfig& config) {
  check_compatible(data, model);
  const auto rows = resolve_rows(data, model.marginals);
  Eigen::MatrixXd latent(data.rows(), data.cols());

  parallel_for(rows.size(), config.threads, [&](std::size_t i) {
    RowConditional cond(rows[i], model.sigma, initial_state(rows[i]), config.ridge);
    cond.settle(config.update_mode, config.max_sweeps, config.sweep_tol);
    latent.row(static_cast<Eigen::Index>(i)) = cond.state().mean.transpose();
  });

  ImputationResult out;
  out.completed = fill(data, latent, model, out.imputed_mask);
  out.latent = std::move(latent);
  out.unobserved_rows = empty_rows(rows);
  return out;
}

MultipleImputationResult impute_multiple(const MixedDataMatrix& data, const FitResult& model, int m,
                                         std::uint64_t seed, const ImputeConfig& config) {
  if (m < 2) throw InvalidArgument("multiple imputation needs at least 2 draws");
  check_compatible(data, model);
  const auto rows = resolve_rows(data, model.marginals);
  const auto n = data.rows();
  const auto p = data.cols();
  std::vector<Eigen::MatrixXd> latent(m, Eigen::MatrixXd(n, p));

  parallel_for(rows.size(), config.threads, [&](std::size_t i) {
    const auto& row = rows[i];
    RowConditional cond(row, model.sigma, initial_state(row), config.ridge);
    cond.settle(config.update_mode, config.max_sweeps, config.sweep_tol);
    const Eigen::MatrixXd chol =
        row.missing.empty() ? Eigen::MatrixXd() : psd_cholesky(cond.missing_residual(), config.ridge);
    const auto& interval_dims = cond.problem().interval_dims();

    for (int d = 0; d < m; ++d) {
      std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(i)));
      Eigen::VectorXd z_obs = cond.problem().point();
      if (!interval_dims.empty()) {
        const Eigen::VectorXd draw = sample_truncated_row(cond.problem(), config.gibbs_sweeps, rng);
        for (std::size_t k = 0; k < interval_dims.size(); ++k) z_obs(interval_dims[k]) = draw(k);
      }
      auto out = latent[d].row(static_cast<Eigen::Index>(i));
      for (std::size_t k = 0; k < row.observed.size(); ++k) out(row.observed[k]) = z_obs(k);
      if (row.missing.empty()) continue;
      std::normal_distribution<double> gauss;
      Eigen::VectorXd eps(row.missing.size());
      for (Eigen::Index k = 0; k < eps.size(); ++k) eps(k) = gauss(rng);
      const Eigen::VectorXd z_mis = cond.regression() * z_obs + chol * eps;
      for (std::size_t k = 0; k < row.missing.size(); ++k) out(row.missing[k]) = z_mis(k);
    }
  });

  MultipleImputationResult result;
  result.seed = seed;
  const auto unobserved = empty_rows(rows);
  for (int d = 0; d < m; ++d) {
    ImputationResult draw;
    draw.completed = fill(data, latent[d], model, draw.imputed_mask);
    draw.latent = std::move(latent[d]);
    draw.unobserved_rows = unobserved;
    result.draws.push_back(std::move(draw));
  }
  return result;
}

}  // namespace copula
