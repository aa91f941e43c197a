#pragma once

#include <Eigen/Core>

#include <vector>

namespace copula {

/// Inverse of a symmetric positive-definite matrix via Cholesky. When the
/// factorization fails, a diagonal ridge starting at `ridge` is added and
/// grown tenfold until it succeeds; `ridge_applied` reports whether that
/// happened.
struct SpdInverse {
  Eigen::MatrixXd inverse;
  bool ridge_applied = false;
};

SpdInverse spd_inverse(const Eigen::MatrixXd& m, double ridge);

/// Lower Cholesky factor of a symmetric positive-semidefinite matrix, with
/// the same ridge fallback.
Eigen::MatrixXd psd_cholesky(const Eigen::MatrixXd& m, double ridge);

/// Rows/columns of `m` selected by `idx`.
Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const std::vector<int>& rows, const std::vector<int>& cols);

}  // namespace copula
