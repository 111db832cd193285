#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lpm/geometry.hpp"
#include "lpm/model.hpp"
#include "test_support.hpp"

using namespace lpm;

namespace {

Points pts(std::initializer_list<std::initializer_list<double>> rows) {
  const auto q = rows.begin()->size();
  Points p(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(q));
  Eigen::Index r = 0;
  for (auto row : rows) {
    Eigen::Index c = 0;
    for (double v : row) p(r, c++) = v;
    ++r;
  }
  return p;
}

Eigen::RowVectorXd pt(std::initializer_list<double> v) {
  Eigen::RowVectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index c = 0;
  for (double e : v) x(c++) = e;
  return x;
}

// Length of the radial geodesic from the origin to radius r, integrated
// numerically from the conformal factor 2 rho / (rho^2 - s^2) with
// composite Simpson's rule.
double radial_geodesic_length(double r, double rho) {
  const int m = 20000;
  const double h = r / m;
  auto f = [&](double s) { return 2.0 * rho / (rho * rho - s * s); };
  double acc = f(0.0) + f(r);
  for (int k = 1; k < m; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(k * h);
  return acc * h / 3.0;
}

}  // namespace

TEST(Target, SymmetricPairAveragesToOrigin) {
  const auto t = target(pts({{1, 0}, {-1, 0}}));
  EXPECT_DOUBLE_EQ(t(0), 0.0);
  EXPECT_DOUBLE_EQ(t(1), 0.0);
}

TEST(Target, SingleItemIsItsOwnTarget) {
  const auto t = target(pts({{2, 0}}));
  EXPECT_DOUBLE_EQ(t(0), 2.0);
  EXPECT_DOUBLE_EQ(t(1), 0.0);
}

TEST(Target, ArithmeticMean) {
  const auto t = target(pts({{1, 1}, {3, 1}, {2, 4}}));
  EXPECT_DOUBLE_EQ(t(0), 2.0);
  EXPECT_DOUBLE_EQ(t(1), 2.0);
}

TEST(Target, StaysInsideDisk) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto disk = MetricSpace::poincare(0.7);
  for (int rep = 0; rep < 200; ++rep) {
    Points B(5, 2);
    for (int j = 0; j < 5; ++j) {
      const double rad = 0.7 * std::sqrt(u(rng)) * 0.999999, ang = 2 * M_PI * u(rng);
      B(j, 0) = rad * std::cos(ang);
      B(j, 1) = rad * std::sin(ang);
    }
    EXPECT_TRUE(disk.admissible(target(B)));
  }
}

TEST(Distance, EuclideanThreeFourFive) {
  EXPECT_DOUBLE_EQ(distance(pt({3, 4}), pt({0, 0}), MetricSpace::euclidean(2)), 5.0);
}

TEST(Distance, PoincareRadialMatchesGeodesicIntegral) {
  const auto disk = MetricSpace::poincare(1.0);
  const double d = distance(pt({0.5, 0}), pt({0, 0}), disk);
  // Two independent routes to the same value: closed-form radial distance
  // and numerical integration along the radius.
  EXPECT_NEAR(d, std::log(3.0), 1e-14);
  EXPECT_NEAR(radial_geodesic_length(0.5, 1.0), std::log(3.0), 1e-10);
  EXPECT_NEAR(d, 1.0986122886681098, 1e-12);
}

TEST(Distance, PoincareRadialOtherRadius) {
  const double rho = 2.5, r = 1.7;
  const auto disk = MetricSpace::poincare(rho);
  EXPECT_NEAR(distance(pt({0, r}), pt({0, 0}), disk), std::log((rho + r) / (rho - r)), 1e-12);
  EXPECT_NEAR(radial_geodesic_length(r, rho), std::log((rho + r) / (rho - r)), 1e-8);
}

TEST(Distance, IdenticalPointsAreAtZero) {
  EXPECT_EQ(distance(pt({0.3, -0.2}), pt({0.3, -0.2}), MetricSpace::poincare(1.0)), 0.0);
  EXPECT_EQ(distance(pt({7, 1, 2}), pt({7, 1, 2}), MetricSpace::euclidean(3)), 0.0);
}

TEST(Distance, PointOutsideDiskIsDomainError) {
  EXPECT_THROW(distance(pt({1.0, 0}), pt({0, 0}), MetricSpace::poincare(1.0)), DomainError);
  EXPECT_THROW(distance(pt({0, 0}), pt({0, 3}), MetricSpace::poincare(2.0)), DomainError);
}

TEST(Distance, MetricAxiomsOnRandomTriples) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& space : {MetricSpace::euclidean(3), MetricSpace::poincare(1.3)}) {
    auto draw = [&]() {
      Eigen::RowVectorXd x(space.q);
      if (space.kind == Geometry::Euclidean) {
        for (int c = 0; c < space.q; ++c) x(c) = 3.0 * nd(rng);
      } else {
        const double rad = space.rho * std::sqrt(u(rng)) * 0.999, ang = 2 * M_PI * u(rng);
        x << rad * std::cos(ang), rad * std::sin(ang);
      }
      return x;
    };
    for (int k = 0; k < 10000; ++k) {
      const auto x = draw(), y = draw(), z = draw();
      const double dxy = distance(x, y, space), dyx = distance(y, x, space);
      const double dxz = distance(x, z, space), dzy = distance(z, y, space);
      ASSERT_GE(dxy, 0.0);
      ASSERT_NEAR(dxy, dyx, 1e-9 * (1.0 + dxy));
      ASSERT_LE(dxy, dxz + dzy + 1e-9);
    }
  }
}

TEST(Distance, PoincareSmallSeparationsFollowConformalFactor) {
  const double rho = 1.5;
  const auto disk = MetricSpace::poincare(rho);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double rad = 0.9 * rho * std::sqrt(u(rng)), ang = 2 * M_PI * u(rng), dir = 2 * M_PI * u(rng);
    const Eigen::RowVector2d x(rad * std::cos(ang), rad * std::sin(ang));
    const Eigen::RowVector2d unit(std::cos(dir), std::sin(dir));
    const double eps = 1e-6;
    const double fd = distance(x, x + eps * unit, disk) / eps;
    const double conformal = 2.0 * rho / (rho * rho - x.squaredNorm());
    EXPECT_NEAR(fd / conformal, 1.0, 1e-3);
    // Converges: a ten times smaller step agrees as well.
    const double fd2 = distance(x, x + 0.1 * eps * unit, disk) / (0.1 * eps);
    EXPECT_NEAR(fd2 / fd, 1.0, 1e-3);
  }
}

TEST(Propagate, MidpointContraction) {
  const double lam[] = {0.5};
  const auto pos = propagate_positions(pt({2, 0}), lam, pt({0, 0}));
  EXPECT_DOUBLE_EQ(pos(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(pos(1, 1), 0.0);
}

TEST(Propagate, FullAndNoProgressAreExact) {
  const auto a1 = pt({0.123456789, -3.3}), tgt = pt({1.0 / 3.0, 0.7});
  const double one[] = {1.0}, zero[] = {0.0};
  const auto full = propagate_positions(a1, one, tgt);
  const auto none = propagate_positions(a1, zero, tgt);
  EXPECT_EQ(full(1, 0), tgt(0));
  EXPECT_EQ(full(1, 1), tgt(1));
  EXPECT_EQ(none(1, 0), a1(0));
  EXPECT_EQ(none(1, 1), a1(1));
}

TEST(Propagate, RejectsRatesOutsideUnitInterval) {
  const double bad[] = {1.2};
  EXPECT_THROW(propagate_positions(pt({0, 0}), bad, pt({1, 1})), DomainError);
  const double neg[] = {0.3, -0.1};
  EXPECT_THROW(propagate_positions(pt({0, 0}), neg, pt({1, 1})), DomainError);
}

TEST(Propagate, ContractionIdentityAndRateRecovery) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> nd(0.0, 2.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto space = MetricSpace::euclidean(3);
  for (int k = 0; k < 10000; ++k) {
    Eigen::RowVectorXd a1(3), tgt(3);
    for (int c = 0; c < 3; ++c) {
      a1(c) = nd(rng);
      tgt(c) = nd(rng);
    }
    const double lam[] = {u(rng)};
    const auto pos = propagate_positions(a1, lam, tgt);
    const double d1 = distance(a1, tgt, space), d2 = distance(pos.row(1), tgt, space);
    ASSERT_NEAR(d2, (1.0 - lam[0]) * d1, 1e-12 * (1.0 + d1));
    ASSERT_NEAR(rate_from_distances(d1, d2), lam[0], 1e-12);
  }
}

TEST(RateFromDistances, Examples) {
  EXPECT_DOUBLE_EQ(rate_from_distances(2.0, 0.5), 0.75);
  EXPECT_DOUBLE_EQ(rate_from_distances(1.0, 1.0), 0.0);
  EXPECT_THROW(rate_from_distances(0.0, 0.0), DomainError);
  EXPECT_THROW(rate_from_distances(1.0, 1.5), DomainError);
}

TEST(LinearPredictor, Examples) {
  ModelParams params;
  LatentState s;
  const auto space = MetricSpace::euclidean(2);
  params.alpha = Vector::Zero(1);
  params.beta = Vector::Zero(1);
  params.gamma = 3.7;
  s.a1 = pts({{1, 1}});
  s.B = pts({{1, 1}});
  s.lambda = Matrix::Constant(1, 1, 0.4);
  s.r = IntMatrix::Zero(1, 1);
  s.pi = Matrix::Constant(1, 1, 0.5);
  // d = 0 at both time points (a1 sits on the only item, which is the target).
  EXPECT_DOUBLE_EQ(linear_predictor(0, 0, 0, params, s, space), 0.0);
  EXPECT_DOUBLE_EQ(logistic(linear_predictor(0, 0, 1, params, s, space)), 0.5);

  params.alpha(0) = 1.0;
  params.beta(0) = -1.0;
  params.gamma = 2.0;
  s.a1 = pts({{0.5, 0}});
  s.B = pts({{0, 0}});
  EXPECT_DOUBLE_EQ(linear_predictor(0, 0, 0, params, s, space), -1.0);
}

TEST(LinearPredictor, TargetDistanceUsesPropagatedPosition) {
  ModelParams params;
  LatentState s;
  params.alpha = Vector::Constant(1, 0.2);
  params.beta = Vector::Constant(2, -0.1);
  params.gamma = 2.0;
  s.a1 = pts({{4, 0}});
  s.B = pts({{1, 0}, {-1, 0}});  // target at the origin
  s.lambda = Matrix::Constant(1, 2, 0.5);
  s.r = IntMatrix::Zero(1, 2);
  s.pi = Matrix::Constant(1, 2, 0.5);
  const auto sp = MetricSpace::euclidean(2);
  EXPECT_DOUBLE_EQ(linear_predictor(0, 0, 0, params, s, sp), 0.1 - 2.0 * 3.0);
  EXPECT_DOUBLE_EQ(linear_predictor(0, 1, 1, params, s, sp), 0.1 - 2.0 * 2.0);
  EXPECT_DOUBLE_EQ(linear_predictor(0, 1, 2, params, s, sp), 0.1 - 2.0 * 1.0);
  EXPECT_THROW(linear_predictor(0, 2, 0, params, s, sp), std::out_of_range);
}

TEST(LinearPredictor, ZeroGammaIsRasch) {
  std::mt19937_64 rng(2);
  ModelParams params;
  LatentState s;
  const auto space = MetricSpace::euclidean(2);
  testutil::random_model(4, 3, 3, space, rng, params, s);
  params.gamma = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j)
      for (int t = 0; t < 3; ++t)
        EXPECT_DOUBLE_EQ(linear_predictor(i, j, t, params, s, space), params.alpha(i) + params.beta(j));
}

TEST(LogLikelihood, SingleObservationAtZeroPredictor) {
  ResponseTensor y(1, 1, 2);
  y.set(0, 0, 0, 1);
  ModelParams params{Vector::Zero(1), Vector::Zero(1), 0.0, 1.0};
  LatentState s{pts({{0, 0}}), pts({{0, 0}}), Matrix::Constant(1, 1, 0.5), IntMatrix::Zero(1, 1),
                Matrix::Constant(1, 1, 0.5)};
  EXPECT_NEAR(log_likelihood(y, params, s, MetricSpace::euclidean(2)), std::log(0.5), 1e-15);
}

TEST(LogLikelihood, EmptyMaskIsZero) {
  ResponseTensor y(3, 2, 2);
  std::mt19937_64 rng(1);
  ModelParams params;
  LatentState s;
  testutil::random_model(3, 2, 2, MetricSpace::euclidean(2), rng, params, s);
  EXPECT_EQ(log_likelihood(y, params, s, MetricSpace::euclidean(2)), 0.0);
}

TEST(LogLikelihood, AdditiveOverCells) {
  ResponseTensor y(2, 1, 2);
  for (int i = 0; i < 2; ++i)
    for (int t = 0; t < 2; ++t) y.set(i, 0, t, 1);
  ModelParams params{Vector::Zero(2), Vector::Zero(1), 0.0, 1.0};
  LatentState s{pts({{0, 0}, {1, 1}}), pts({{0, 0}}), Matrix::Constant(2, 1, 0.5), IntMatrix::Zero(2, 1),
                Matrix::Constant(2, 1, 0.5)};
  EXPECT_NEAR(log_likelihood(y, params, s, MetricSpace::euclidean(2)), 4.0 * std::log(0.5), 1e-14);
}

TEST(LogLikelihood, InvariantUnderJointRescaling) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.2, 5.0);
  const auto space = MetricSpace::euclidean(2);
  for (int rep = 0; rep < 50; ++rep) {
    ModelParams params;
    LatentState s;
    testutil::random_model(6, 4, 3, space, rng, params, s);
    const auto y = testutil::random_tensor(6, 4, 3, rng);
    const double before = log_likelihood(y, params, s, space);
    const double c = u(rng);
    s.B /= c;
    s.a1 /= c;
    params.gamma *= c;
    EXPECT_NEAR(log_likelihood(y, params, s, space), before, 1e-10);
  }
}

TEST(LogLikelihood, InvariantUnderRigidMotion) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 2 * M_PI);
  std::normal_distribution<double> nd(0.0, 3.0);
  const auto space = MetricSpace::euclidean(2);
  for (int rep = 0; rep < 50; ++rep) {
    ModelParams params;
    LatentState s;
    testutil::random_model(5, 4, 3, space, rng, params, s);
    const auto y = testutil::random_tensor(5, 4, 3, rng);
    const double before = log_likelihood(y, params, s, space);
    const double th = u(rng);
    Eigen::Matrix2d rot;
    rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    if (rep % 2) rot.col(0) *= -1.0;  // include reflections
    const Eigen::RowVector2d shift(nd(rng), nd(rng));
    s.a1 = (s.a1 * rot).rowwise() + shift;
    s.B = (s.B * rot).rowwise() + shift;
    EXPECT_NEAR(log_likelihood(y, params, s, space), before, 1e-10);
  }
}

TEST(MetricSpace, RejectsHyperbolicOutsideTwoDimensions) {
  MetricSpace bad{Geometry::PoincareDisk, 3, 1.0};
  EXPECT_THROW(bad.validate(), ValidationError);
  EXPECT_NO_THROW(MetricSpace::poincare(2.0).validate());
}

TEST(ResponseTensor, FitValidationRequiresCoverage) {
  ResponseTensor y(2, 2, 2);
  y.set(0, 0, 0, 1);
  y.set(0, 1, 1, 0);
  y.set(1, 0, 0, 1);
  EXPECT_THROW(y.validate_for_fit(), ValidationError);
  y.set(1, 1, 1, 1);
  EXPECT_NO_THROW(y.validate_for_fit());
  EXPECT_THROW(y.set(0, 0, 0, 2), ValidationError);
}
