#pragma once

#include "copula/data_model.hpp"
#include "copula/marginals.hpp"
#include "copula/truncnorm.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace copula {

/// A p x p correlation matrix: symmetric, unit diagonal, positive
/// semidefinite within 1e-8.
class CorrelationMatrix {
 public:
  CorrelationMatrix() = default;
  /// Validates the invariants; throws InvalidArgument on violation.
  explicit CorrelationMatrix(Eigen::MatrixXd m);

  static CorrelationMatrix identity(Eigen::Index p);

  Eigen::Index dim() const { return m_.rows(); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  struct Unchecked {};
  CorrelationMatrix(Eigen::MatrixXd m, Unchecked) : m_(std::move(m)) {}
  friend CorrelationMatrix project_elliptope(const Eigen::MatrixXd& m);

  Eigen::MatrixXd m_;
};

/// D^{-1/2} m D^{-1/2} with D = diag(m). Requires a strictly positive diagonal.
CorrelationMatrix project_elliptope(const Eigen::MatrixXd& m);

/// Per-row conditional mean and diagonal conditional variance of z.
struct LatentRowState {
  Eigen::VectorXd mean;
  Eigen::VectorXd var_diag;
};

/// One row resolved against fitted marginals: each observed cell is either a
/// known latent point (continuous) or a latent interval (ordinal).
struct RowObservation {
  std::vector<int> observed;
  std::vector<int> missing;
  /// Latent point per observed continuous cell, indexed like `observed`.
  std::vector<double> points;
  /// Interval per observed ordinal cell, indexed like `observed`; empty for
  /// continuous cells.
  std::vector<std::optional<LatentInterval>> intervals;

  Eigen::Index dim() const { return static_cast<Eigen::Index>(observed.size() + missing.size()); }
};

RowObservation resolve_row(const MixedDataMatrix& data, Eigen::Index i, const std::vector<MarginalModel>& marginals);
std::vector<RowObservation> resolve_rows(const MixedDataMatrix& data, const std::vector<MarginalModel>& marginals);

/// Starting state: truncated N(0, 1) moments on ordinal cells, the latent
/// point on continuous cells, prior moments on missing cells.
LatentRowState initial_state(const RowObservation& row);

struct EStepResult {
  LatentRowState state;
  /// E[z z^T | observed cells, sigma] under the diagonal approximation.
  Eigen::MatrixXd contribution;
  bool ridge_applied = false;
};

/// One E-step for a single row: one sweep of truncated-moment updates over
/// the ordinal cells, then the conditional moments of the missing cells.
EStepResult estep_row(const RowObservation& row, const CorrelationMatrix& sigma, const LatentRowState& prev,
                      UpdateMode mode = UpdateMode::GaussSeidel, double ridge = 1e-8);

/// Conditional structure of one row under a fixed sigma: the truncated box
/// problem over the observed cells and the regression of the missing cells
/// on the observed ones.
class RowConditional {
 public:
  RowConditional(const RowObservation& row, const CorrelationMatrix& sigma, const LatentRowState& prev,
                 double ridge = 1e-8);

  /// One truncated-moment sweep over the ordinal cells.
  void sweep(UpdateMode mode);
  /// Sweeps until the ordinal means move less than `tol` (max-abs) or
  /// `max_sweeps` is reached; returns the number of sweeps run.
  int settle(UpdateMode mode, int max_sweeps, double tol);

  const RowObservation& row() const { return *row_; }
  const TruncatedBoxProblem& problem() const { return problem_; }
  /// Sigma_MO Sigma_OO^{-1}.
  const Eigen::MatrixXd& regression() const { return regression_; }
  /// Sigma_MM - Sigma_MO Sigma_OO^{-1} Sigma_OM.
  const Eigen::MatrixXd& missing_residual() const { return residual_; }
  bool ridge_applied() const { return problem_.ridge_applied(); }

  /// Conditional mean/variance of z after the latest sweep.
  LatentRowState state() const;
  /// E[z z^T | observed cells] after the latest sweep.
  Eigen::MatrixXd second_moment() const;

 private:
  const RowObservation* row_;
  const Eigen::MatrixXd* sigma_;
  TruncatedBoxProblem problem_;
  Eigen::VectorXd obs_var_;
  Eigen::MatrixXd regression_;
  Eigen::MatrixXd residual_;
};

struct EmConfig {
  double tol = 0.01;
  int max_iter = 50;
  double ridge = 1e-8;
  UpdateMode update_mode = UpdateMode::GaussSeidel;
  int threads = 1;
};

struct FitResult {
  CorrelationMatrix sigma;
  std::vector<MarginalModel> marginals;
  int iterations = 0;
  /// Relative Frobenius change of sigma at each iteration.
  std::vector<double> sigma_change_trace;
  bool converged = false;
  /// Row factorizations that needed a ridge, summed over iterations.
  std::size_t ridge_events = 0;
  std::vector<std::string> warnings;
};

/// Approximate EM for the copula correlation, starting from the identity.
FitResult fit(const MixedDataMatrix& data, const EmConfig& config = {});

/// Same, with marginals supplied by the caller.
FitResult fit(const MixedDataMatrix& data, std::vector<MarginalModel> marginals, const EmConfig& config);

/// Mean over rows of log phi(z_O; 0, sigma_OO), constant dropped. Exact when
/// every column is continuous; throws InvalidArgument otherwise.
double continuous_log_likelihood(const MixedDataMatrix& data, const std::vector<MarginalModel>& marginals,
                                 const CorrelationMatrix& sigma);

double relative_frobenius_change(const Eigen::MatrixXd& next, const Eigen::MatrixXd& prev);

}  // namespace copula
