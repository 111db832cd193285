#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "lpm/polya_gamma.hpp"
#include "test_support.hpp"

using namespace lpm;

namespace {

// Density of PG(1, c) from the alternating series of the J*(1, 0) density,
// written independently of the sampler's coefficient routine:
//   PG(1, c) = J*(1, 0) / 4 tilted by cosh(c/2) exp(-c^2 w / 2).
double pg1_density(double w, double c) {
  if (w <= 0.0) return 0.0;
  const double x = 4.0 * w;
  double f = 0.0;
  for (int n = 0; n < 200; ++n) {
    const double k = n + 0.5;
    double term;
    if (x > 0.64)
      term = M_PI * k * std::exp(-k * k * M_PI * M_PI * x / 2.0);
    else
      term = M_PI * k * std::pow(2.0 / (M_PI * x), 1.5) * std::exp(-2.0 * k * k / x);
    f += (n % 2 ? -1.0 : 1.0) * term;
    if (std::abs(term) < 1e-300) break;
  }
  return 4.0 * std::cosh(c / 2.0) * std::exp(-c * c * w / 2.0) * f;
}

struct Moments {
  double mass, mean, var, m4;
};

// Composite Simpson integration of the density on (0, 6].
Moments pg1_moments_by_quadrature(double c) {
  const int m = 60000;
  const double hi = 6.0, h = hi / m;
  double s0 = 0, s1 = 0, s2 = 0;
  std::vector<double> dens(m + 1);
  for (int k = 0; k <= m; ++k) dens[k] = pg1_density(k * h, c);
  auto simpson = [&](auto g) {
    double acc = g(0) + g(m);
    for (int k = 1; k < m; ++k) acc += (k % 2 ? 4.0 : 2.0) * g(k);
    return acc * h / 3.0;
  };
  s0 = simpson([&](int k) { return dens[k]; });
  s1 = simpson([&](int k) { return k * h * dens[k]; });
  s2 = simpson([&](int k) { return (k * h - s1) * (k * h - s1) * dens[k]; });
  const double s4 = simpson([&](int k) { return std::pow(k * h - s1, 4) * dens[k]; });
  return {s0, s1, s2, s4};
}

}  // namespace

TEST(PgMoments, ClosedFormsMatchQuadratureOfDensity) {
  for (double c : {0.0, 0.5, 1.0, 2.0, 5.0}) {
    const auto m = pg1_moments_by_quadrature(c);
    EXPECT_NEAR(m.mass, 1.0, 1e-9) << "c=" << c;
    EXPECT_NEAR(m.mean, pg1_mean(c), 1e-9) << "c=" << c;
    EXPECT_NEAR(m.var, pg1_variance(c), 1e-9) << "c=" << c;
  }
}

TEST(PgMoments, MeanExamples) {
  EXPECT_DOUBLE_EQ(pg1_mean(0.0), 0.25);
  EXPECT_NEAR(pg1_mean(2.0), std::tanh(1.0) / 4.0, 1e-15);
  EXPECT_NEAR(pg1_mean(2.0), 0.19039853898894116, 1e-12);
  EXPECT_NEAR(pg1_mean(1.0), 0.23105857863000487, 1e-12);
  EXPECT_NEAR(pg1_mean(1e-6), 0.25, 1e-12);
  EXPECT_NEAR(pg1_variance(0.0), 1.0 / 24.0, 1e-15);
  double prev = pg1_mean(0.0);
  for (double c = 0.1; c < 200.0; c *= 1.5) {
    const double m = pg1_mean(c);
    EXPECT_LT(m, prev);
    EXPECT_GT(m, 0.0);
    prev = m;
  }
  EXPECT_DOUBLE_EQ(pg1_mean(-3.0), pg1_mean(3.0));
}

TEST(PgSampler, EmpiricalMomentsMatchOracle) {
  const int draws = 100000;
  for (double c : {0.0, 0.5, 1.0, 2.0, 5.0}) {
    SplitMix64 rng(derive_seed(42, static_cast<std::uint64_t>(c * 10)));
    std::vector<double> w(draws);
    for (auto& v : w) {
      v = sample_pg1(c, rng);
      ASSERT_GT(v, 0.0);
    }
    const auto oracle = pg1_moments_by_quadrature(c);
    const double se_mean = std::sqrt(oracle.var / draws);
    EXPECT_NEAR(testutil::mean(w), pg1_mean(c), 3.0 * se_mean) << "c=" << c;
    const double se_var = std::sqrt((oracle.m4 - oracle.var * oracle.var) / draws);
    EXPECT_NEAR(testutil::variance(w), pg1_variance(c), 4.0 * se_var) << "c=" << c;
  }
}

TEST(PgSampler, MatchesDensityCdf) {
  const double c = 1.0;
  // Tabulate the CDF by cumulative trapezoid integration of the density.
  const int m = 60000;
  const double hi = 6.0, h = hi / m;
  std::vector<double> cdf(m + 1, 0.0);
  double prev = pg1_density(0.0, c);
  for (int k = 1; k <= m; ++k) {
    const double cur = pg1_density(k * h, c);
    cdf[k] = cdf[k - 1] + 0.5 * h * (prev + cur);
    prev = cur;
  }
  auto F = [&](double x) {
    if (x <= 0) return 0.0;
    if (x >= hi) return 1.0;
    const int k = static_cast<int>(x / h);
    const double f = x / h - k;
    return cdf[k] * (1 - f) + cdf[k + 1] * f;
  };
  SplitMix64 rng(7);
  std::vector<double> w(20000);
  for (auto& v : w) v = sample_pg1(c, rng);
  EXPECT_GT(testutil::ks_one_sample(w, F).p_value, 0.01);
}

TEST(PgSampler, SymmetricInTilt) {
  SplitMix64 a(101), b(202);
  std::vector<double> pos(10000), neg(10000);
  for (auto& v : pos) v = sample_pg1(1.7, a);
  for (auto& v : neg) v = sample_pg1(-1.7, b);
  EXPECT_GT(testutil::ks_two_sample(pos, neg).p_value, 0.01);
}

TEST(PgSampler, DeterministicForSeed) {
  SplitMix64 a(9), b(9);
  for (int k = 0; k < 1000; ++k) ASSERT_EQ(sample_pg1(0.8, a), sample_pg1(0.8, b));
}

TEST(PgSampler, ExtremeTiltsStayFiniteAndPositive) {
  SplitMix64 rng(3);
  for (double c : {1e-12, 30.0, 300.0, 5000.0, -5000.0}) {
    for (int k = 0; k < 200; ++k) {
      const double w = sample_pg1(c, rng);
      ASSERT_TRUE(std::isfinite(w));
      ASSERT_GT(w, 0.0);
    }
  }
}

TEST(PgSampler, RejectsNonFiniteTilt) {
  SplitMix64 rng(1);
  EXPECT_THROW(sample_pg1(INFINITY, rng), DomainError);
  EXPECT_THROW(sample_pg1(NAN, rng), DomainError);
}
