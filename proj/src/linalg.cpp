#include "copula/linalg.hpp"

#include "copula/errors.hpp"

#include <Eigen/Cholesky>

namespace copula {

namespace {
constexpr int kMaxRidgeSteps = 12;
}

SpdInverse spd_inverse(const Eigen::MatrixXd& m, double ridge) {
  SpdInverse out;
  if (m.size() == 0) return out;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  double lambda = ridge;
  for (int step = 0; llt.info() != Eigen::Success && step < kMaxRidgeSteps; ++step) {
    out.ridge_applied = true;
    Eigen::MatrixXd shifted = m;
    shifted.diagonal().array() += lambda;
    llt.compute(shifted);
    lambda *= 10.0;
  }
  if (llt.info() != Eigen::Success) throw NumericalError("matrix is not positive definite even after ridge");
  out.inverse = llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  return out;
}

Eigen::MatrixXd psd_cholesky(const Eigen::MatrixXd& m, double ridge) {
  if (m.size() == 0) return {};
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  double lambda = ridge;
  for (int step = 0; llt.info() != Eigen::Success && step < kMaxRidgeSteps; ++step) {
    Eigen::MatrixXd shifted = m;
    shifted.diagonal().array() += lambda;
    llt.compute(shifted);
    lambda *= 10.0;
  }
  if (llt.info() != Eigen::Success) throw NumericalError("matrix is not positive semidefinite");
  return llt.matrixL();
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = m(rows[r], cols[c]);
  }
  return out;
}

}  // namespace copula
