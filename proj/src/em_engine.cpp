#include "copula/em_engine.hpp"

#include "copula/errors.hpp"
#include "copula/linalg.hpp"
#include "copula/parallel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace copula {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kPsdTol = 1e-8;
// Rows per reduction chunk. Fixed so that the summation order, and hence
// the result, does not depend on the thread count.
constexpr std::size_t kChunkRows = 32;

TruncatedBoxProblem make_problem(const RowObservation& row, const Eigen::MatrixXd& sigma,
                                 const LatentRowState& prev, double ridge) {
  const auto o = static_cast<Eigen::Index>(row.observed.size());
  Eigen::VectorXd point(o);
  for (Eigen::Index k = 0; k < o; ++k) {
    point(k) = row.intervals[k] ? prev.mean(row.observed[k]) : row.points[k];
  }
  return TruncatedBoxProblem(submatrix(sigma, row.observed, row.observed), std::move(point), row.intervals, ridge);
}

}  // namespace

CorrelationMatrix::CorrelationMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw InvalidArgument("correlation matrix must be square");
  for (Eigen::Index i = 0; i < m_.rows(); ++i) {
    if (m_(i, i) != 1.0) throw InvalidArgument("correlation matrix must have unit diagonal");
    for (Eigen::Index j = 0; j < i; ++j) {
      if (!std::isfinite(m_(i, j)) || std::abs(m_(i, j) - m_(j, i)) > kSymmetryTol)
        throw InvalidArgument("correlation matrix must be symmetric");
    }
  }
  if (m_.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m_, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -kPsdTol)
      throw InvalidArgument("correlation matrix must be positive semidefinite");
  }
}

CorrelationMatrix CorrelationMatrix::identity(Eigen::Index p) {
  return CorrelationMatrix(Eigen::MatrixXd::Identity(p, p), Unchecked{});
}

CorrelationMatrix project_elliptope(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("projection needs a square matrix");
  const Eigen::Index p = m.rows();
  Eigen::VectorXd scale(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    if (!(m(i, i) > 0.0) || !std::isfinite(m(i, i)))
      throw InvalidArgument("projection needs a strictly positive diagonal (entry " + std::to_string(i) + ")");
    scale(i) = 1.0 / std::sqrt(m(i, i));
  }
  Eigen::MatrixXd out = scale.asDiagonal() * m * scale.asDiagonal();
  out = (0.5 * (out + out.transpose())).eval();
  out.diagonal().setOnes();
  return CorrelationMatrix(std::move(out), CorrelationMatrix::Unchecked{});
}

RowObservation resolve_row(const MixedDataMatrix& data, Eigen::Index i, const std::vector<MarginalModel>& marginals) {
  RowObservation row;
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    const int col = static_cast<int>(j);
    if (!data.observed(i, j)) {
      row.missing.push_back(col);
      continue;
    }
    row.observed.push_back(col);
    if (const auto* ord = std::get_if<OrdinalMarginal>(&marginals[j])) {
      row.points.push_back(0.0);
      row.intervals.emplace_back(ord->interval(static_cast<int>(data.value(i, j))));
    } else {
      row.points.push_back(std::get<ContinuousMarginal>(marginals[j]).to_latent(data.value(i, j)));
      row.intervals.emplace_back(std::nullopt);
    }
  }
  return row;
}

std::vector<RowObservation> resolve_rows(const MixedDataMatrix& data, const std::vector<MarginalModel>& marginals) {
  if (static_cast<Eigen::Index>(marginals.size()) != data.cols())
    throw InvalidArgument("marginal count does not match column count");
  std::vector<RowObservation> rows;
  rows.reserve(data.rows());
  for (Eigen::Index i = 0; i < data.rows(); ++i) rows.push_back(resolve_row(data, i, marginals));
  return rows;
}

LatentRowState initial_state(const RowObservation& row) {
  const auto p = row.dim();
  LatentRowState state{Eigen::VectorXd::Zero(p), Eigen::VectorXd::Ones(p)};
  for (std::size_t k = 0; k < row.observed.size(); ++k) {
    const int j = row.observed[k];
    if (row.intervals[k]) {
      const auto m = univariate_moments(0.0, 1.0, *row.intervals[k]);
      state.mean(j) = m.mean;
      state.var_diag(j) = m.variance;
    } else {
      state.mean(j) = row.points[k];
      state.var_diag(j) = 0.0;
    }
  }
  return state;
}

RowConditional::RowConditional(const RowObservation& row, const CorrelationMatrix& sigma, const LatentRowState& prev,
                               double ridge)
    : row_(&row),
      sigma_(&sigma.matrix()),
      problem_(make_problem(row, sigma.matrix(), prev, ridge)),
      obs_var_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(row.observed.size()))) {
  if (sigma.dim() != row.dim()) throw InvalidArgument("row and correlation dimensions differ");
  for (std::size_t k = 0; k < row.observed.size(); ++k) {
    if (row.intervals[k]) obs_var_(static_cast<Eigen::Index>(k)) = prev.var_diag(row.observed[k]);
  }
  if (!row.missing.empty()) {
    const Eigen::MatrixXd sigma_mo = submatrix(*sigma_, row.missing, row.observed);
    regression_ = sigma_mo * problem_.precision();
    residual_ = submatrix(*sigma_, row.missing, row.missing) - regression_ * sigma_mo.transpose();
    residual_ = (0.5 * (residual_ + residual_.transpose())).eval();
  }
}

void RowConditional::sweep(UpdateMode mode) { obs_var_ = problem_.sweep(mode); }

int RowConditional::settle(UpdateMode mode, int max_sweeps, double tol) {
  if (problem_.interval_dims().empty()) {
    sweep(mode);
    return 1;
  }
  int s = 0;
  while (s < max_sweeps) {
    const Eigen::VectorXd before = problem_.point();
    sweep(mode);
    ++s;
    if ((problem_.point() - before).cwiseAbs().maxCoeff() < tol) break;
  }
  return s;
}

LatentRowState RowConditional::state() const {
  const auto& row = *row_;
  const auto p = row.dim();
  LatentRowState state{Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(p)};
  const Eigen::VectorXd& z_obs = problem_.point();
  for (std::size_t k = 0; k < row.observed.size(); ++k) {
    state.mean(row.observed[k]) = z_obs(static_cast<Eigen::Index>(k));
    state.var_diag(row.observed[k]) = obs_var_(static_cast<Eigen::Index>(k));
  }
  if (row.missing.empty()) return state;
  if (row.observed.empty()) {
    for (int j : row.missing) state.var_diag(j) = (*sigma_)(j, j);
    return state;
  }
  const Eigen::VectorXd z_mis = regression_ * z_obs;
  const Eigen::MatrixXd spread = regression_ * obs_var_.asDiagonal() * regression_.transpose();
  for (std::size_t k = 0; k < row.missing.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    state.mean(row.missing[k]) = z_mis(kk);
    state.var_diag(row.missing[k]) = std::max(0.0, residual_(kk, kk) + spread(kk, kk));
  }
  return state;
}

Eigen::MatrixXd RowConditional::second_moment() const {
  const auto& row = *row_;
  const auto p = row.dim();
  if (row.observed.empty()) return *sigma_;

  const Eigen::VectorXd& z_obs = problem_.point();
  const auto o = static_cast<Eigen::Index>(row.observed.size());
  const auto m = static_cast<Eigen::Index>(row.missing.size());

  // Cov[z_O] is diagonal with the truncated variances on ordinal cells.
  Eigen::MatrixXd cov_oo = obs_var_.asDiagonal();
  Eigen::VectorXd mean(p);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index a = 0; a < o; ++a) {
    mean(row.observed[a]) = z_obs(a);
    cov(row.observed[a], row.observed[a]) = cov_oo(a, a);
  }
  if (m > 0) {
    const Eigen::VectorXd z_mis = regression_ * z_obs;
    // Cov[z_M, z_O] = B Cov[z_O];  Cov[z_M] = residual + B Cov[z_O] B^T.
    const Eigen::MatrixXd cov_mo = regression_ * obs_var_.asDiagonal();
    const Eigen::MatrixXd cov_mm = residual_ + cov_mo * regression_.transpose();
    for (Eigen::Index a = 0; a < m; ++a) {
      const int ja = row.missing[a];
      mean(ja) = z_mis(a);
      for (Eigen::Index b = 0; b < m; ++b) cov(ja, row.missing[b]) = cov_mm(a, b);
      for (Eigen::Index b = 0; b < o; ++b) {
        cov(ja, row.observed[b]) = cov_mo(a, b);
        cov(row.observed[b], ja) = cov_mo(a, b);
      }
    }
  }
  cov.noalias() += mean * mean.transpose();
  return cov;
}

EStepResult estep_row(const RowObservation& row, const CorrelationMatrix& sigma, const LatentRowState& prev,
                      UpdateMode mode, double ridge) {
  if (prev.mean.size() != row.dim() || prev.var_diag.size() != row.dim())
    throw InvalidArgument("previous state dimension does not match the row");
  RowConditional cond(row, sigma, prev, ridge);
  cond.sweep(mode);
  return {cond.state(), cond.second_moment(), cond.ridge_applied()};
}

double relative_frobenius_change(const Eigen::MatrixXd& next, const Eigen::MatrixXd& prev) {
  return (next - prev).norm() / prev.norm();
}

FitResult fit(const MixedDataMatrix& data, const EmConfig& config) {
  return fit(data, fit_marginals(data), config);
}

FitResult fit(const MixedDataMatrix& data, std::vector<MarginalModel> marginals, const EmConfig& config) {
  if (config.max_iter < 1) throw InvalidArgument("max_iter must be at least 1");
  if (!(config.tol >= 0.0)) throw InvalidArgument("tol must be non-negative");
  const auto n = data.rows();
  const auto p = data.cols();
  if (n == 0 || p == 0) throw InvalidArgument("cannot fit an empty matrix");

  FitResult result;
  if (n < p) result.warnings.push_back("fewer rows than columns (n=" + std::to_string(n) + ", p=" + std::to_string(p) + ")");

  const auto rows = resolve_rows(data, marginals);
  std::vector<LatentRowState> states;
  states.reserve(rows.size());
  for (const auto& row : rows) states.push_back(initial_state(row));

  const std::size_t chunks = (static_cast<std::size_t>(n) + kChunkRows - 1) / kChunkRows;
  std::vector<Eigen::MatrixXd> partial(chunks);
  std::vector<std::size_t> ridge_counts(chunks);

  CorrelationMatrix sigma = CorrelationMatrix::identity(p);
  for (int t = 1; t <= config.max_iter; ++t) {
    parallel_for(chunks, config.threads, [&](std::size_t c) {
      Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(p, p);
      std::size_t ridges = 0;
      const std::size_t end = std::min(static_cast<std::size_t>(n), (c + 1) * kChunkRows);
      for (std::size_t i = c * kChunkRows; i < end; ++i) {
        auto step = estep_row(rows[i], sigma, states[i], config.update_mode, config.ridge);
        acc += step.contribution;
        states[i] = std::move(step.state);
        ridges += step.ridge_applied ? 1 : 0;
      }
      partial[c] = std::move(acc);
      ridge_counts[c] = ridges;
    });

    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(p, p);
    for (std::size_t c = 0; c < chunks; ++c) {
      g += partial[c];
      result.ridge_events += ridge_counts[c];
    }
    g /= static_cast<double>(n);
    if (!g.allFinite()) throw NumericalError("non-finite E-step moments at iteration " + std::to_string(t));

    CorrelationMatrix next = project_elliptope(g);
    const double change = relative_frobenius_change(next.matrix(), sigma.matrix());
    sigma = std::move(next);
    result.sigma_change_trace.push_back(change);
    result.iterations = t;
    if (change < config.tol) {
      result.converged = true;
      break;
    }
  }
  result.sigma = std::move(sigma);
  result.marginals = std::move(marginals);
  return result;
}

double continuous_log_likelihood(const MixedDataMatrix& data, const std::vector<MarginalModel>& marginals,
                                 const CorrelationMatrix& sigma) {
  for (const auto& m : marginals) {
    if (std::holds_alternative<OrdinalMarginal>(m))
      throw InvalidArgument("exact log-likelihood is only available for continuous columns");
  }
  const auto rows = resolve_rows(data, marginals);
  double total = 0.0;
  for (const auto& row : rows) {
    if (row.observed.empty()) continue;
    const Eigen::MatrixXd s = submatrix(sigma.matrix(), row.observed, row.observed);
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) throw NumericalError("singular correlation submatrix in log-likelihood");
    const Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(row.points.data(), row.points.size());
    const Eigen::VectorXd w = llt.matrixL().solve(z);
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    total += -0.5 * logdet - 0.5 * w.squaredNorm();
  }
  return total / static_cast<double>(data.rows());
}

}  // namespace copula
