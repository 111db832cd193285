// Statistical helpers shared by the test suites.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "lpm/model.hpp"
#include "lpm/random.hpp"
#include "lpm/types.hpp"

namespace lpm::testutil {

/// Kolmogorov survival function P(K > x).
inline double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.3) {
    // Small-x form avoids the slowly converging alternating series.
    const double pi2 = M_PI * M_PI;
    double s = 0.0;
    for (int k = 1; k < 50; ++k) s += std::exp(-(2 * k - 1) * (2 * k - 1) * pi2 / (8.0 * x * x));
    return 1.0 - std::sqrt(2.0 * M_PI) / x * s;
  }
  double s = 0.0;
  for (int k = 1; k < 100; ++k) s += (k % 2 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * x * x);
  return std::clamp(2.0 * s, 0.0, 1.0);
}

struct KsResult {
  double statistic;
  double p_value;
};

inline KsResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)};
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d)};
}

inline double mean(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double variance(const std::vector<double>& x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

inline double normal_cdf(double x, double mu = 0.0, double sd = 1.0) {
  return 0.5 * std::erfc(-(x - mu) / (sd * std::sqrt(2.0)));
}

/// Random latent state and parameters for property tests.
template <class Rng>
void random_model(int n, int p, int T, const MetricSpace& space, Rng& rng, ModelParams& params, LatentState& s) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  params.alpha = Vector(n);
  params.beta = Vector(p);
  for (int i = 0; i < n; ++i) params.alpha(i) = nd(rng);
  for (int j = 0; j < p; ++j) params.beta(j) = nd(rng);
  params.gamma = 0.5 + ud(rng);
  params.sigma_alpha2 = 1.0;
  auto point = [&](auto row) {
    if (space.kind == Geometry::Euclidean) {
      for (int c = 0; c < space.q; ++c) row(c) = nd(rng);
    } else {
      const double rad = 0.95 * space.rho * std::sqrt(ud(rng));
      const double ang = 2.0 * M_PI * ud(rng);
      row(0) = rad * std::cos(ang);
      row(1) = rad * std::sin(ang);
    }
  };
  s.a1 = Points(n, space.q);
  s.B = Points(p, space.q);
  for (int i = 0; i < n; ++i) point(s.a1.row(i));
  for (int j = 0; j < p; ++j) point(s.B.row(j));
  s.lambda = Matrix(n, T - 1);
  s.pi = Matrix::Constant(n, T - 1, 0.5);
  s.r = IntMatrix::Zero(n, T - 1);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < T - 1; ++k) s.lambda(i, k) = ud(rng);
}

/// All-observed tensor with random responses.
template <class Rng>
ResponseTensor random_tensor(int n, int p, int T, Rng& rng) {
  ResponseTensor y(n, p, T);
  std::bernoulli_distribution b(0.5);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j)
      for (int t = 0; t < T; ++t) y.set(i, j, t, b(rng) ? 1 : 0);
  return y;
}

}  // namespace lpm::testutil
