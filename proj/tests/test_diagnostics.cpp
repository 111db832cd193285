#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "lpm/diagnostics.hpp"
#include "test_support.hpp"

using namespace lpm;

namespace {

// Direct re-computation without log-sum-exp or vectorization.
double brute_waic(const Matrix& ll) {
  double lppd = 0.0, pw = 0.0;
  const double S = static_cast<double>(ll.rows());
  for (Eigen::Index c = 0; c < ll.cols(); ++c) {
    double acc = 0.0, m = 0.0;
    for (Eigen::Index s = 0; s < ll.rows(); ++s) {
      acc += std::exp(ll(s, c));
      m += ll(s, c);
    }
    lppd += std::log(acc / S);
    m /= S;
    double v = 0.0;
    for (Eigen::Index s = 0; s < ll.rows(); ++s) v += (ll(s, c) - m) * (ll(s, c) - m);
    pw += v / (S - 1.0);
  }
  return -2.0 * (lppd - pw);
}

PosteriorSamples constant_samples(int n, int p, int T, double alpha, int S) {
  PosteriorSamples out;
  out.n = n;
  out.p = p;
  out.T = T;
  Draw d;
  d.params = {Vector::Constant(n, alpha), Vector::Zero(p), 0.0, 1.0};
  d.state.a1 = Points::Zero(n, 2);
  d.state.B = Points::Identity(p, 2);
  d.state.lambda = Matrix::Constant(n, T - 1, 0.5);
  d.state.r = IntMatrix::Zero(n, T - 1);
  d.state.pi = Matrix::Constant(n, T - 1, 0.5);
  out.draws.assign(static_cast<std::size_t>(S), d);
  return out;
}

}  // namespace

TEST(Waic, ConstantColumn) {
  Matrix ll(2, 1);
  ll << -1, -1;
  const auto r = waic(ll);
  EXPECT_NEAR(r.lppd, -1.0, 1e-15);
  EXPECT_NEAR(r.p_waic, 0.0, 1e-15);
  EXPECT_NEAR(r.waic, 2.0, 1e-14);
}

TEST(Waic, TwoPointExample) {
  Matrix ll(2, 1);
  ll << std::log(0.5), std::log(0.25);
  const auto r = waic(ll);
  EXPECT_NEAR(r.lppd, std::log(0.375), 1e-14);
  EXPECT_NEAR(r.p_waic, 0.240226506959101, 1e-12);
  // -2 * (log 0.375 - 0.2402265...) from an independent script.
  EXPECT_NEAR(r.waic, 2.442111519941654, 1e-12);
}

TEST(Waic, AdditiveOverColumnsAndOrderFree) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd(-1.0, 0.7);
  Matrix ll(30, 9);
  for (Eigen::Index k = 0; k < ll.size(); ++k) ll.data()[k] = nd(rng);
  double sum = 0.0;
  for (Eigen::Index c = 0; c < ll.cols(); ++c) sum += waic(Matrix(ll.col(c))).waic;
  EXPECT_NEAR(waic(ll).waic, sum, 1e-10);
  Matrix shuffled = ll;
  shuffled.col(0).swap(shuffled.col(5));
  shuffled.col(2).swap(shuffled.col(8));
  EXPECT_NEAR(waic(shuffled).waic, waic(ll).waic, 1e-10);
}

TEST(Waic, MatchesBruteForceOnRandomMatrices) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd(-2.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix ll(3, 4);
    for (Eigen::Index k = 0; k < ll.size(); ++k) ll.data()[k] = nd(rng);
    ASSERT_NEAR(waic(ll).waic, brute_waic(ll), 1e-10);
  }
}

TEST(Waic, RejectsSingleSampleAndNonFinite) {
  EXPECT_THROW(waic(Matrix::Zero(1, 3)), ValidationError);
  Matrix bad = Matrix::Zero(3, 2);
  bad(1, 1) = NAN;
  EXPECT_THROW(waic(bad), NumericalError);
}

TEST(Psrf, CutoffsMatchTabulatedValues) {
  EXPECT_NEAR(psrf_cutoff(526, 5), 1.000336, 1e-5);
  EXPECT_NEAR(psrf_cutoff(852, 5), 1.000342, 1e-5);
  EXPECT_NEAR(psrf_cutoff(526, 5), 1.000336250, 1e-8);
  EXPECT_NEAR(psrf_cutoff(852, 5), 1.000341607, 1e-8);
  EXPECT_GT(psrf_cutoff(3, 2), 1.0);
}

TEST(Psrf, IidNormalChainsAreNearOne) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<Matrix> chains(5, Matrix(100000, 10));
  for (auto& c : chains)
    for (Eigen::Index k = 0; k < c.size(); ++k) c.data()[k] = nd(rng);
  const auto r = psrf_multivariate(chains);
  EXPECT_GE(r.psrf, 0.999);
  EXPECT_LE(r.psrf, 1.01);
  EXPECT_EQ(r.n_params, 10);
  EXPECT_EQ(r.n_chains, 5);
  EXPECT_EQ(r.batch_size, 316);
}

TEST(Psrf, SeparatedChainsAreFlagged) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<Matrix> chains(3, Matrix(4000, 3));
  for (std::size_t c = 0; c < chains.size(); ++c)
    for (Eigen::Index k = 0; k < chains[c].size(); ++k) chains[c].data()[k] = nd(rng) + 3.0 * static_cast<double>(c);
  const auto r = psrf_multivariate(chains);
  EXPECT_GT(r.psrf, r.cutoff);
  EXPECT_FALSE(r.converged());
}

TEST(Psrf, IndependentChainsScoreAtLeastCopiedChains) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd(0.0, 1.0);
  // AR(1) chains around a per-chain level: independent runs carry residual
  // between-chain spread that identical copies hide.
  auto ar_chain = [&](int S, int d) {
    Matrix m(S, d);
    Eigen::RowVectorXd level(d), x = Eigen::RowVectorXd::Zero(d);
    for (int k = 0; k < d; ++k) level(k) = nd(rng);
    for (int s = 0; s < S; ++s) {
      for (int k = 0; k < d; ++k) x(k) = 0.9 * x(k) + nd(rng);
      m.row(s) = x + level;
    }
    return m;
  };
  int holds = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix base = ar_chain(2500, 2);
    const std::vector<Matrix> copies(3, base);
    const std::vector<Matrix> indep{base, ar_chain(2500, 2), ar_chain(2500, 2)};
    const double c = psrf_multivariate(copies).psrf;
    EXPECT_LT(c, 1.01);
    holds += psrf_multivariate(indep).psrf >= c ? 1 : 0;
  }
  EXPECT_GE(holds, 19);
}

TEST(Psrf, Errors) {
  std::vector<Matrix> one(1, Matrix::Random(100, 2));
  EXPECT_THROW(psrf_multivariate(one), ValidationError);
  std::vector<Matrix> flat(2, Matrix::Ones(100, 2));
  EXPECT_THROW(psrf_multivariate(flat), NumericalError);
  std::vector<Matrix> ragged{Matrix::Random(100, 2), Matrix::Random(90, 2)};
  EXPECT_THROW(psrf_multivariate(ragged), ValidationError);
}

TEST(Acceptance, RatesAndFlags) {
  AcceptanceCounter c;
  for (int k = 0; k < 100; ++k) c.record(k < 30);
  auto r = block_acceptance("lambda", c);
  EXPECT_DOUBLE_EQ(*r.rate, 0.30);
  EXPECT_FALSE(r.flagged);
  AcceptanceCounter hi;
  for (int k = 0; k < 100; ++k) hi.record(k < 90);
  r = block_acceptance("a1", hi);
  EXPECT_DOUBLE_EQ(*r.rate, 0.90);
  EXPECT_TRUE(r.flagged);
  r = block_acceptance("b", AcceptanceCounter{});
  EXPECT_FALSE(r.rate.has_value());
  EXPECT_FALSE(r.flagged);
  AcceptanceCounter low;
  for (int k = 0; k < 100; ++k) low.record(k < 15);
  EXPECT_TRUE(block_acceptance("b", low).flagged);
}

TEST(PosteriorPredictive, SaturatedPredictorGivesAllOnes) {
  ResponseTensor y(4, 5, 2);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 5; ++j)
      for (int t = 0; t < 2; ++t) y.set(i, j, t, 1);
  const auto samples = constant_samples(4, 5, 2, 1e6, 3);
  ChainRng rng(6);
  const auto ppc = posterior_predictive(y, samples, 50, rng);
  ASSERT_EQ(ppc.rows.size(), 8u);
  EXPECT_EQ(ppc.draws.minCoeff(), 1.0);
  for (const auto& r : ppc.rows) {
    EXPECT_EQ(r.lo, 1.0);
    EXPECT_EQ(r.mid, 1.0);
    EXPECT_EQ(r.hi, 1.0);
    EXPECT_EQ(r.observed, 1.0);
    EXPECT_TRUE(r.covered());
  }
}

TEST(PosteriorPredictive, ZeroPredictorIsBinomialHalf) {
  const int p = 10;
  ResponseTensor y(3, p, 2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < p; ++j)
      for (int t = 0; t < 2; ++t) y.set(i, j, t, j % 2);
  const auto samples = constant_samples(3, p, 2, 0.0, 4);
  ChainRng rng(7);
  const int draws = 20000;
  const auto ppc = posterior_predictive(y, samples, draws, rng);
  const auto col = ppc.draws.col(0);
  std::vector<double> v(col.begin(), col.end());
  EXPECT_NEAR(testutil::mean(v), 0.5, 4.0 * std::sqrt(0.25 / p / draws));
  EXPECT_NEAR(testutil::variance(v), 0.25 / p, 0.002);
  // Binomial(10, 1/2) quantiles: 2.5% -> 2, 97.5% -> 8.
  EXPECT_EQ(ppc.rows[0].lo, 0.2);
  EXPECT_EQ(ppc.rows[0].mid, 0.5);
  EXPECT_EQ(ppc.rows[0].hi, 0.8);
  EXPECT_DOUBLE_EQ(ppc.rows[0].observed, 0.5);
}

TEST(PosteriorPredictive, SingleSampleMatchesParametricBootstrap) {
  const int p = 8;
  ResponseTensor y(1, p, 2);
  for (int j = 0; j < p; ++j) {
    y.set(0, j, 0, 1);
    y.set(0, j, 1, 0);
  }
  y.set_missing(0, 3, 1);
  auto samples = constant_samples(1, p, 2, 0.4, 1);
  for (int j = 0; j < p; ++j) samples.draws[0].params.beta(j) = 0.2 * j - 0.7;
  samples.draws[0].params.gamma = 1.2;
  ChainRng rng(8);
  const auto ppc = posterior_predictive(y, samples, 20000, rng);
  ASSERT_EQ(ppc.rows[1].n_observed, p - 1);
  // Direct simulation at the same parameter; at time 2 the distance is to the target.
  ChainRng rng2(9);
  std::vector<double> direct(20000);
  const auto& d0 = samples.draws[0];
  const Eigen::RowVectorXd tgt = target(d0.state.B);
  const double dist = (individual_positions(d0.state, 0, tgt).row(1) - tgt).norm();
  ASSERT_GT(dist, 0.0);
  for (auto& v : direct) {
    int ones = 0;
    for (int j = 0; j < p; ++j) {
      if (j == 3) continue;
      const double eta = 0.4 + d0.params.beta(j) - d0.params.gamma * dist;
      ones += uniform01(rng2) < logistic(eta) ? 1 : 0;
    }
    v = static_cast<double>(ones) / (p - 1);
  }
  const auto col = ppc.draws.col(1);
  const std::vector<double> pred(col.begin(), col.end());
  // Discrete support: compare cell probabilities instead of a KS p-value.
  for (int k = 0; k <= p - 1; ++k) {
    const double x = static_cast<double>(k) / (p - 1);
    const double a = std::count(pred.begin(), pred.end(), x) / 20000.0;
    const double b = std::count(direct.begin(), direct.end(), x) / 20000.0;
    EXPECT_NEAR(a, b, 0.02) << "k=" << k;
  }
}

TEST(PosteriorPredictive, CoverageAndSchema) {
  ResponseTensor y(2, 3, 2);
  for (int j = 0; j < 3; ++j) {
    y.set(0, j, 0, 1);
    y.set(0, j, 1, 1);
    y.set(1, j, 0, 0);
  }
  const auto samples = constant_samples(2, 3, 2, 1e6, 2);
  ChainRng rng(10);
  const auto ppc = posterior_predictive(y, samples, 10, rng);
  // Individual 2 has nothing observed at time 2 and is skipped there.
  ASSERT_EQ(ppc.rows.size(), 3u);
  EXPECT_DOUBLE_EQ(predictive_coverage(ppc, 0), 0.5);
  EXPECT_DOUBLE_EQ(predictive_coverage(ppc, 1), 1.0);
  EXPECT_THROW(posterior_predictive(y, PosteriorSamples{}, 10, rng), ValidationError);
}
