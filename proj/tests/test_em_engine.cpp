#include "copula/em_engine.hpp"
#include "copula/errors.hpp"
#include "copula/parallel.hpp"
#include "copula/synthetic.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <random>

using namespace copula;

namespace {

MixedDataMatrix continuous_matrix(const Eigen::MatrixXd& x, MaskMatrix mask = {}) {
  if (mask.size() == 0) mask = MaskMatrix::Constant(x.rows(), x.cols(), true);
  Eigen::MatrixXd v = x;
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = 0; j < v.cols(); ++j)
      if (!mask(i, j)) v(i, j) = std::numeric_limits<double>::quiet_NaN();
  return MixedDataMatrix(v, mask, std::vector<VariableKind>(x.cols(), VariableKind::continuous()), {});
}

Eigen::MatrixXd correlated_draws(int n, const Eigen::MatrixXd& sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const Eigen::MatrixXd l = sigma.llt().matrixL();
  Eigen::MatrixXd z(n, sigma.rows());
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd e(sigma.rows());
    for (auto& v : e) v = g(rng);
    z.row(i) = (l * e).transpose();
  }
  return z;
}

Eigen::MatrixXd rank_correlation_oracle(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) z.col(j) = oracle::rank_normal_scores(x.col(j));
  return oracle::sample_correlation_uncentered(z);
}

void expect_valid_correlation(const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) EXPECT_EQ(m(i, i), 1.0);
  EXPECT_LE((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8);
}

RowObservation observation(std::vector<int> observed, std::vector<double> points,
                           std::vector<std::optional<LatentInterval>> intervals, std::vector<int> missing) {
  RowObservation r;
  r.observed = std::move(observed);
  r.points = std::move(points);
  r.intervals = std::move(intervals);
  r.missing = std::move(missing);
  return r;
}

Eigen::Matrix2d rho2(double r) {
  Eigen::Matrix2d m;
  m << 1, r, r, 1;
  return m;
}

}  // namespace

TEST(CorrelationMatrix, ValidatesInvariants) {
  EXPECT_NO_THROW(CorrelationMatrix(Eigen::MatrixXd(rho2(0.3))));
  Eigen::MatrixXd bad_diag = rho2(0.3);
  bad_diag(1, 1) = 1.0 + 1e-9;
  EXPECT_THROW(CorrelationMatrix{bad_diag}, InvalidArgument);
  Eigen::MatrixXd asym = rho2(0.3);
  asym(0, 1) = 0.31;
  EXPECT_THROW(CorrelationMatrix{asym}, InvalidArgument);
  EXPECT_THROW(CorrelationMatrix(Eigen::MatrixXd(rho2(1.5))), InvalidArgument);
  EXPECT_THROW(CorrelationMatrix(Eigen::MatrixXd::Ones(2, 3)), InvalidArgument);
}

TEST(ProjectElliptope, HandExamples) {
  Eigen::MatrixXd m(2, 2);
  m << 4, 2, 2, 1;
  EXPECT_EQ(project_elliptope(m).matrix(), Eigen::MatrixXd::Ones(2, 2));
  EXPECT_EQ(project_elliptope(Eigen::MatrixXd::Identity(3, 3)).matrix(), Eigen::MatrixXd::Identity(3, 3));
  Eigen::MatrixXd d = Eigen::Vector3d(2.0, 0.5, 7.0).asDiagonal();
  EXPECT_EQ(project_elliptope(d).matrix(), Eigen::MatrixXd::Identity(3, 3));
}

TEST(ProjectElliptope, RejectsNonPositiveDiagonal) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(2, 2);
  m(1, 1) = 0.0;
  EXPECT_THROW(project_elliptope(m), InvalidArgument);
  m(1, 1) = -1.0;
  EXPECT_THROW(project_elliptope(m), InvalidArgument);
}

TEST(ProjectElliptope, PreservesPsdWithExactUnitDiagonal) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd a(6, 4);
    for (auto& v : a.reshaped()) v = g(rng);
    expect_valid_correlation(project_elliptope(a * a.transpose() + 1e-3 * Eigen::MatrixXd::Identity(6, 6)).matrix());
  }
}

TEST(EstepRow, FullyObservedRowIsOuterProduct) {
  const auto row = observation({0, 1}, {0.5, -1.0}, {std::nullopt, std::nullopt}, {});
  const auto r = estep_row(row, CorrelationMatrix(Eigen::MatrixXd(rho2(0.4))), initial_state(row));
  Eigen::Vector2d z(0.5, -1.0);
  EXPECT_LE((r.contribution - z * z.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(r.state.mean, Eigen::VectorXd(z));
}

TEST(EstepRow, FullyMissingRowContributesSigma) {
  Eigen::MatrixXd s(3, 3);
  s << 1, 0.3, -0.2, 0.3, 1, 0.5, -0.2, 0.5, 1;
  const auto row = observation({}, {}, {}, {0, 1, 2});
  const auto r = estep_row(row, CorrelationMatrix(s), initial_state(row));
  EXPECT_LE((r.contribution - s).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(r.state.mean, Eigen::VectorXd::Zero(3));
}

TEST(EstepRow, IndependentMissingDimension) {
  // Sigma = I, z1 = 1 known, z2 missing: mean (1, 0), second moment I.
  const auto row = observation({0}, {1.0}, {std::nullopt}, {1});
  const auto r = estep_row(row, CorrelationMatrix::identity(2), initial_state(row));
  EXPECT_NEAR(r.state.mean(0), 1.0, 1e-15);
  EXPECT_NEAR(r.state.mean(1), 0.0, 1e-15);
  EXPECT_LE((r.contribution - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(EstepRow, MissingGivenKnownIsGaussianRegression) {
  const auto row = observation({0}, {1.2}, {std::nullopt}, {1});
  const auto r = estep_row(row, CorrelationMatrix(Eigen::MatrixXd(rho2(0.6))), initial_state(row));
  EXPECT_NEAR(r.state.mean(1), 0.72, 1e-14);
  EXPECT_NEAR(r.contribution(1, 1), 0.64 + 0.72 * 0.72, 1e-14);
  EXPECT_NEAR(r.contribution(0, 1), 1.2 * 0.72, 1e-14);
}

TEST(EstepRow, ContributionIsPsd) {
  Eigen::MatrixXd s(3, 3);
  s << 1, 0.7, 0.2, 0.7, 1, -0.3, 0.2, -0.3, 1;
  const auto row = observation({0, 1}, {0.0, 0.0}, {LatentInterval{-0.4, 0.3}, LatentInterval{0.9, INFINITY}}, {2});
  const auto r = estep_row(row, CorrelationMatrix(s), initial_state(row));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.contribution);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
  EXPECT_TRUE(row.intervals[0]->contains(r.state.mean(0)));
  EXPECT_TRUE(row.intervals[1]->contains(r.state.mean(1)));
}

TEST(Fit, CompleteContinuousDataIsExactInOneStep) {
  Eigen::MatrixXd s(4, 4);
  s << 1, 0.5, 0.2, -0.3, 0.5, 1, 0.1, 0.0, 0.2, 0.1, 1, 0.4, -0.3, 0.0, 0.4, 1;
  Eigen::MatrixXd x = correlated_draws(300, s, 11);
  x.col(1) = x.col(1).array().exp();
  x.col(3) = x.col(3).array().cube();
  const auto data = continuous_matrix(x);
  const Eigen::MatrixXd expected = rank_correlation_oracle(x);

  EmConfig one;
  one.max_iter = 1;
  const auto first = fit(data, one);
  EXPECT_LE((first.sigma.matrix() - expected).cwiseAbs().maxCoeff(), 1e-10);

  const auto full = fit(data);
  EXPECT_TRUE(full.converged);
  EXPECT_EQ(full.iterations, 2);
  EXPECT_LE(full.sigma_change_trace.back(), 1e-12);
  EXPECT_LE((full.sigma.matrix() - expected).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Fit, SingleColumnIsOne) {
  Eigen::MatrixXd x(20, 1);
  for (int i = 0; i < 20; ++i) x(i, 0) = std::sin(i);
  MaskMatrix mask = MaskMatrix::Constant(20, 1, true);
  mask(3, 0) = false;
  const auto r = fit(continuous_matrix(x, mask));
  EXPECT_EQ(r.sigma.matrix(), Eigen::MatrixXd::Ones(1, 1));
}

TEST(Fit, WarnsWhenFewerRowsThanColumns) {
  Eigen::MatrixXd x(3, 5);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 5; ++j) x(i, j) = i * 5 + j * (j % 2 ? 1 : -1);
  const auto r = fit(continuous_matrix(x));
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("fewer rows"), std::string::npos);
}

TEST(Fit, ColumnFailureNamesColumn) {
  Eigen::MatrixXd x(10, 2);
  x.col(0).setLinSpaced(0, 1);
  x.col(1).setConstant(3.0);
  try {
    fit(continuous_matrix(x));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("V2"), std::string::npos) << e.what();
  }
}

TEST(Fit, RejectsBadConfig) {
  Eigen::MatrixXd x = correlated_draws(20, Eigen::MatrixXd::Identity(2, 2), 1);
  EmConfig c;
  c.max_iter = 0;
  EXPECT_THROW(fit(continuous_matrix(x), c), InvalidArgument);
}

TEST(Fit, EveryIterateIsACorrelationMatrix) {
  const auto sigma = random_correlation(8, 5);
  const auto syn = generate(sigma, SyntheticSpec::mixed_thirds(400, 8, 0.0, 9));
  const auto data = mask_mcar(syn.complete, 0.3, 10);
  for (int t = 1; t <= 6; ++t) {
    EmConfig c;
    c.max_iter = t;
    c.tol = 0.0;
    const auto r = fit(data, c);
    EXPECT_EQ(r.iterations, t);
    expect_valid_correlation(r.sigma.matrix());
  }
}

TEST(Fit, ContinuousLikelihoodAscends) {
  Eigen::MatrixXd s(4, 4);
  s << 1, 0.6, 0.3, 0.1, 0.6, 1, 0.5, 0.2, 0.3, 0.5, 1, 0.4, 0.1, 0.2, 0.4, 1;
  const Eigen::MatrixXd x = correlated_draws(500, s, 21);
  std::mt19937_64 rng(22);
  std::bernoulli_distribution drop(0.3);
  MaskMatrix mask(500, 4);
  for (auto& v : mask.reshaped()) v = !drop(rng);
  const auto data = continuous_matrix(x, mask);
  const auto marginals = fit_marginals(data);
  double prev = continuous_log_likelihood(data, marginals, CorrelationMatrix::identity(4));
  for (int t = 1; t <= 8; ++t) {
    EmConfig c;
    c.max_iter = t;
    c.tol = 0.0;
    const double ll = continuous_log_likelihood(data, marginals, fit(data, marginals, c).sigma);
    EXPECT_GE(ll, prev - 1e-9) << "iteration " << t;
    prev = ll;
  }
}

namespace {

MixedDataMatrix permute_columns(const MixedDataMatrix& data, const std::vector<int>& perm) {
  const auto p = static_cast<Eigen::Index>(perm.size());
  Eigen::MatrixXd v(data.rows(), p);
  MaskMatrix m(data.rows(), p);
  std::vector<VariableKind> kinds;
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < p; ++j) {
    v.col(j) = data.values().col(perm[j]);
    m.col(j) = data.mask().col(perm[j]);
    kinds.push_back(data.kinds()[perm[j]]);
    names.push_back(data.column_names()[perm[j]]);
  }
  return MixedDataMatrix(v, m, kinds, names);
}

double permutation_gap(const MixedDataMatrix& data, const std::vector<int>& perm, const EmConfig& c) {
  const auto a = fit(data, c).sigma.matrix();
  const auto b = fit(permute_columns(data, perm), c).sigma.matrix();
  double gap = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (std::size_t j = 0; j < perm.size(); ++j) gap = std::max(gap, std::abs(b(i, j) - a(perm[i], perm[j])));
  return gap;
}

}  // namespace

TEST(Fit, PermutationEquivarianceJacobi) {
  const auto syn = generate(random_correlation(6, 2), SyntheticSpec::mixed_thirds(300, 6, 0.0, 3));
  const auto data = mask_mcar(syn.complete, 0.25, 4);
  EmConfig c;
  c.update_mode = UpdateMode::Jacobi;
  EXPECT_LE(permutation_gap(data, {3, 0, 5, 1, 4, 2}, c), 1e-12);
}

TEST(Fit, PermutationEquivarianceContinuous) {
  Eigen::MatrixXd s(4, 4);
  s << 1, 0.6, 0.3, 0.1, 0.6, 1, 0.5, 0.2, 0.3, 0.5, 1, 0.4, 0.1, 0.2, 0.4, 1;
  const Eigen::MatrixXd x = correlated_draws(400, s, 8);
  std::mt19937_64 rng(9);
  std::bernoulli_distribution drop(0.3);
  MaskMatrix mask(400, 4);
  for (auto& v : mask.reshaped()) v = !drop(rng);
  EXPECT_LE(permutation_gap(continuous_matrix(x, mask), {2, 3, 0, 1}, EmConfig{}), 1e-12);
}

TEST(Fit, GaussSeidelOrderEffectIsSmall) {
  // Sweep order follows column order, so equivariance is only approximate.
  const auto syn = generate(random_correlation(6, 2), SyntheticSpec::mixed_thirds(300, 6, 0.0, 3));
  const auto data = mask_mcar(syn.complete, 0.25, 4);
  EXPECT_LE(permutation_gap(data, {3, 0, 5, 1, 4, 2}, EmConfig{}), 1e-2);
}

TEST(Fit, MonotoneTransformInvarianceIsBitExact) {
  const auto sigma = random_correlation(6, 12);
  const auto syn = generate(sigma, SyntheticSpec::mixed_thirds(300, 6, 0.0, 13));
  const auto data = mask_mcar(syn.complete, 0.3, 14);
  Eigen::MatrixXd v = data.values();
  for (int j = 0; j < 6; ++j) {
    if (!data.kinds()[j].is_continuous()) continue;
    v.col(j) = (v.col(j).array() * 3.0 + 1.0).log() * 2.0 - 7.0;
  }
  const auto transformed = data.with_values(v, data.mask());
  const auto a = fit(data);
  const auto b = fit(transformed);
  EXPECT_EQ(a.sigma.matrix(), b.sigma.matrix());
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Fit, DeterministicAcrossThreadCounts) {
  const auto sigma = random_correlation(9, 31);
  const auto syn = generate(sigma, SyntheticSpec::mixed_thirds(500, 9, 0.0, 32));
  const auto data = mask_mcar(syn.complete, 0.3, 33);
  EmConfig c;
  const auto base = fit(data, c);
  for (int threads : {2, 3, 8}) {
    c.threads = threads;
    const auto r = fit(data, c);
    EXPECT_EQ(r.sigma.matrix(), base.sigma.matrix()) << threads;
    EXPECT_EQ(r.sigma_change_trace, base.sigma_change_trace);
  }
}

TEST(Fit, JacobiModeAlsoRecovers) {
  const auto sigma = random_correlation(6, 41);
  const auto syn = generate(sigma, SyntheticSpec::mixed_thirds(1000, 6, 0.0, 42));
  const auto data = mask_mcar(syn.complete, 0.2, 43);
  EmConfig c;
  c.update_mode = UpdateMode::Jacobi;
  const auto r = fit(data, c);
  const double err = relative_frobenius_change(r.sigma.matrix(), sigma.matrix());
  const double base = relative_frobenius_change(Eigen::MatrixXd::Identity(6, 6), sigma.matrix());
  EXPECT_LT(err, base);
}

TEST(Fit, RecoveryBeatsIdentity) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto sigma = random_correlation(15, mix_seed(seed, 1));
    const auto syn = generate(sigma, SyntheticSpec::mixed_thirds(2000, 15, 0.0, mix_seed(seed, 2)));
    const auto data = mask_mcar(syn.complete, 0.3, mix_seed(seed, 3));
    const auto r = fit(data);
    EXPECT_LE(r.iterations, 50);
    const double err = relative_frobenius_change(r.sigma.matrix(), sigma.matrix());
    const double base = relative_frobenius_change(Eigen::MatrixXd::Identity(15, 15), sigma.matrix());
    EXPECT_LT(err, base) << seed;
  }
}

TEST(ContinuousLogLikelihood, RejectsOrdinalColumns) {
  const auto syn = generate(random_correlation(3, 1), SyntheticSpec::mixed_thirds(50, 3, 0.0, 1));
  const auto marginals = fit_marginals(syn.complete);
  EXPECT_THROW(continuous_log_likelihood(syn.complete, marginals, CorrelationMatrix::identity(3)), InvalidArgument);
}
