#include "copula/marginals.hpp"
#include "copula/errors.hpp"
#include "copula/normal.hpp"

#include "consistency.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace copula;

TEST(FitContinuous, SortsAndStores) {
  const std::vector<double> a{1.0, 2.0, 3.0};
  const std::vector<double> b{3.0, 1.0, 2.0};
  EXPECT_EQ(fit_continuous(a).sorted_observed(), a);
  EXPECT_EQ(fit_continuous(b).sorted_observed(), a);
  EXPECT_EQ(fit_continuous(b).n_obs(), 3u);
}

TEST(FitContinuous, DegenerateColumn) {
  const std::vector<double> same{5.0, 5.0};
  const std::vector<double> one{5.0};
  EXPECT_THROW(fit_continuous(same), DegenerateColumnError);
  EXPECT_THROW(fit_continuous(one), DegenerateColumnError);
}

TEST(ToLatentContinuous, MatchesDirectEvaluation) {
  const std::vector<double> x{1.0, 2.0, 3.0};
  const auto m = fit_continuous(x);
  EXPECT_NEAR(to_latent_continuous(m, 2.0), 0.0, 1e-15);
  EXPECT_NEAR(to_latent_continuous(m, 3.0), oracle::Phi_inv(0.75), 1e-12);
  EXPECT_NEAR(to_latent_continuous(m, 3.0), 0.6744897501960817, 1e-12);
  // Below the sample: smallest attainable mass 1/(n+1).
  EXPECT_NEAR(to_latent_continuous(m, -100.0), oracle::Phi_inv(0.25), 1e-12);
  EXPECT_TRUE(std::isfinite(to_latent_continuous(m, 1e300)));
}

TEST(ToLatentContinuous, TiesUseWeakInequality) {
  const std::vector<double> x{1.0, 2.0, 2.0, 4.0};
  const auto m = fit_continuous(x);
  EXPECT_NEAR(to_latent_continuous(m, 2.0), oracle::Phi_inv(3.0 / 5.0), 1e-12);
}

TEST(ToLatentContinuous, MonotoneAndStrictOnDistinctValues) {
  std::mt19937_64 rng(1);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> x(200);
  for (auto& v : x) v = e(rng);
  const auto m = fit_continuous(x);
  double prev = -INFINITY;
  for (double q = -1.0; q < 8.0; q += 0.01) {
    const double z = m.to_latent(q);
    EXPECT_GE(z, prev);
    prev = z;
  }
  const auto& s = m.sorted_observed();
  for (std::size_t k = 1; k < s.size(); ++k) EXPECT_LT(m.to_latent(s[k - 1]), m.to_latent(s[k]));
}

TEST(ToLatentContinuous, RankInvariance) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<double> x(150), y(150);
  for (std::size_t k = 0; k < x.size(); ++k) {
    x[k] = g(rng);
    y[k] = std::exp(3.0 * x[k]) + 7.0;
  }
  const auto mx = fit_continuous(x);
  const auto my = fit_continuous(y);
  for (std::size_t k = 0; k < x.size(); ++k) EXPECT_EQ(mx.to_latent(x[k]), my.to_latent(y[k]));
}

TEST(FromLatentContinuous, MedianAndClamping) {
  const std::vector<double> x{1.0, 2.0, 3.0};
  const auto m = fit_continuous(x);
  EXPECT_DOUBLE_EQ(from_latent_continuous(m, 0.0), 2.0);
  EXPECT_DOUBLE_EQ(from_latent_continuous(m, 0.0), oracle::brute_quantile(x, 0.5));
  EXPECT_EQ(from_latent_continuous(m, -INFINITY), 1.0);
  EXPECT_EQ(from_latent_continuous(m, INFINITY), 3.0);
  EXPECT_EQ(from_latent_continuous(m, -40.0), 1.0);
  EXPECT_EQ(from_latent_continuous(m, 40.0), 3.0);
}

TEST(FromLatentContinuous, MatchesBruteForceQuantile) {
  std::mt19937_64 rng(5);
  std::lognormal_distribution<double> ln;
  std::vector<double> x(97);
  for (auto& v : x) v = ln(rng);
  const auto m = fit_continuous(x);
  for (double z = -3.0; z <= 3.0; z += 0.037) {
    EXPECT_NEAR(m.from_latent(z), oracle::brute_quantile(x, oracle::Phi(z)), 1e-9) << z;
  }
}

TEST(FromLatentContinuous, RoundTripsEveryObservedValue) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> small(0, 30);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x(80);
    // Half the trials carry heavy ties.
    for (auto& v : x) v = trial % 2 ? static_cast<double>(small(rng)) : g(rng);
    const auto m = fit_continuous(x);
    for (double v : x) EXPECT_EQ(m.from_latent(m.to_latent(v)), v);
  }
}

TEST(FromLatentContinuous, MonotoneInZ) {
  std::vector<double> x{0.5, 0.1, 9.0, 3.3, 3.3, 2.0};
  const auto m = fit_continuous(x);
  double prev = -INFINITY;
  for (double z = -4; z < 4; z += 0.01) {
    const double v = m.from_latent(z);
    EXPECT_GE(v, prev);
    EXPECT_GE(v, 0.1);
    EXPECT_LE(v, 9.0);
    prev = v;
  }
}

TEST(FitOrdinal, DirectEvaluation) {
  const std::vector<double> obs{1, 2, 3};
  const auto m = fit_ordinal(obs, 3);
  ASSERT_EQ(m.cutoffs().size(), 2u);
  EXPECT_NEAR(m.cutoffs()[0], -0.6744897501960817, 1e-12);
  EXPECT_NEAR(m.cutoffs()[0], oracle::Phi_inv(0.25), 1e-12);
  EXPECT_NEAR(m.cutoffs()[1], 0.0, 1e-15);
}

TEST(FitOrdinal, BalancedBinaryCutoffApproachesZero) {
  for (int half : {50, 5000}) {
    std::vector<double> obs;
    for (int k = 0; k < half; ++k) {
      obs.push_back(1);
      obs.push_back(2);
    }
    const auto m = fit_ordinal(obs, 2);
    ASSERT_EQ(m.cutoffs().size(), 1u);
    const double expected = oracle::Phi_inv(static_cast<double>(half) / (2.0 * half + 1.0));
    EXPECT_NEAR(m.cutoffs()[0], expected, 1e-12);
    EXPECT_LT(m.cutoffs()[0], 0.0);
  }
  std::vector<double> small(100), big(10000);
  for (std::size_t k = 0; k < small.size(); ++k) small[k] = 1 + k % 2;
  for (std::size_t k = 0; k < big.size(); ++k) big[k] = 1 + k % 2;
  EXPECT_LT(std::abs(fit_ordinal(big, 2).cutoffs()[0]), std::abs(fit_ordinal(small, 2).cutoffs()[0]));
}

TEST(FitOrdinal, SingleLevelHasNoCutoffs) {
  const std::vector<double> obs{1, 1, 1};
  const auto m = fit_ordinal(obs, 1);
  EXPECT_TRUE(m.cutoffs().empty());
  EXPECT_EQ(m.level_count(), 1);
}

TEST(FitOrdinal, UnobservedLevelIsAnError) {
  const std::vector<double> obs{1, 3, 3};
  EXPECT_THROW(fit_ordinal(obs, 3), UnobservedLevelError);
  const std::vector<double> bad{1, 4};
  EXPECT_THROW(fit_ordinal(bad, 3), InvalidArgument);
}

TEST(FitOrdinal, CutoffsStrictlyIncreasing) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> lv(1, 7);
  std::vector<double> obs(500);
  for (auto& v : obs) v = lv(rng);
  const auto m = fit_ordinal(obs, 7);
  for (std::size_t k = 1; k < m.cutoffs().size(); ++k) EXPECT_GT(m.cutoffs()[k], m.cutoffs()[k - 1]);
}

TEST(CutoffApply, FigureExample) {
  const OrdinalMarginal m({-1.0, 1.0});
  EXPECT_EQ(cutoff_apply(m, 0.0), 2);
  EXPECT_EQ(cutoff_apply(m, -2.0), 1);
  EXPECT_EQ(cutoff_apply(m, 2.0), 3);
  // Half-open: a value equal to a cutoff belongs to the lower level.
  EXPECT_EQ(cutoff_apply(m, 1.0), 2);
  EXPECT_EQ(cutoff_apply(OrdinalMarginal(std::vector<double>{}), 123.0), 1);
}

TEST(LatentInterval, FigureExample) {
  const OrdinalMarginal m({-1.0, 1.0});
  const auto mid = latent_interval(m, 2);
  EXPECT_EQ(mid.lower, -1.0);
  EXPECT_EQ(mid.upper, 1.0);
  const auto low = latent_interval(m, 1);
  EXPECT_EQ(low.lower, -INFINITY);
  EXPECT_EQ(low.upper, -1.0);
  EXPECT_EQ(latent_interval(m, 3).upper, INFINITY);
  EXPECT_THROW(latent_interval(m, 0), InvalidArgument);
  EXPECT_THROW(latent_interval(m, 4), InvalidArgument);
}

TEST(LatentInterval, ConsistentWithCutoffApplyOnGrid) {
  const OrdinalMarginal m({-1.3, -0.2, 0.0, 0.9});
  for (double z = -4.0; z <= 4.0; z += 0.05) {
    int hits = 0;
    for (int level = 1; level <= m.level_count(); ++level) {
      const bool inside = latent_interval(m, level).contains(z);
      EXPECT_EQ(inside, cutoff_apply(m, z) == level) << z;
      hits += inside ? 1 : 0;
    }
    EXPECT_EQ(hits, 1);
  }
  for (double c : m.cutoffs()) EXPECT_TRUE(latent_interval(m, cutoff_apply(m, c)).contains(c));
}

TEST(FitMarginals, ErrorNamesTheColumn) {
  Eigen::MatrixXd v(3, 1);
  v << 2, 2, 2;
  const MixedDataMatrix data(v, MaskMatrix::Constant(3, 1, true), {VariableKind::continuous()}, {"flat"});
  try {
    fit_marginals(data);
    FAIL();
  } catch (const DegenerateColumnError& e) {
    EXPECT_NE(std::string(e.what()).find("flat"), std::string::npos);
  }
}

// Errors shrink at the root-n rate: about sqrt(10) per tenfold increase in n.
TEST(MarginalConsistency, ErrorsShrinkPerDecade) {
  double sup_small = 0, sup_big = 0, l1_small = 0, l1_big = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto [a, b] = harness::consistency_errors(1000, 100 + s);
    const auto [c, d] = harness::consistency_errors(10000, 200 + s);
    sup_small += a;
    l1_small += b;
    sup_big += c;
    l1_big += d;
  }
  EXPECT_GT(sup_small / sup_big, 2.0);
  EXPECT_LT(sup_small / sup_big, 5.0);
  EXPECT_GT(l1_small / l1_big, 2.0);
  EXPECT_LT(l1_small / l1_big, 5.0);
}
