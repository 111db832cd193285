// Exact sampling from the Polya-Gamma PG(1, c) distribution.
//
// Devroye-type alternating-series accept/reject sampler for J*(1, z) as
// described by Polson, Scott and Windle (2013); PG(1, c) = J*(1, c/2) / 4.
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lpm/random.hpp"
#include "lpm/types.hpp"

namespace lpm {

namespace pg_detail {

inline constexpr double kTrunc = 0.64;
inline constexpr double kMaxIterations = 10000;

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// CDF of the inverse Gaussian IG(mu = 1/z, shape = 1) at t.
inline double inverse_gaussian_cdf(double t, double z) {
  const double s = 1.0 / std::sqrt(t);
  const double b = s * (t * z - 1.0);
  const double a = -s * (t * z + 1.0);
  // exp(2z) * Phi(a) may overflow separately; combine in log space.
  return normal_cdf(b) + std::exp(2.0 * z + std::log(normal_cdf(a)));
}

/// n-th coefficient of the alternating series for the J*(1, 0) density.
inline double series_coef(int n, double x) {
  const double k = n + 0.5;
  if (x > kTrunc) return std::numbers::pi * k * std::exp(-0.5 * k * k * std::numbers::pi * std::numbers::pi * x);
  return std::exp(std::log(std::numbers::pi * k) - 1.5 * (std::log(0.5 * std::numbers::pi) + std::log(x)) -
                  2.0 * k * k / x);
}

/// Inverse Gaussian IG(1/z, 1) truncated to (0, kTrunc).
template <class Rng>
double truncated_inverse_gaussian(double z, Rng& rng) {
  const double t = kTrunc;
  const double mu = z > 0.0 ? 1.0 / z : INFINITY;
  double x = t + 1.0;
  if (mu > t) {
    double alpha = 0.0, u = 1.0;
    while (u > alpha) {
      double e1, e2;
      do {
        e1 = std_exponential(rng);
        e2 = std_exponential(rng);
      } while (e1 * e1 > 2.0 * e2 / t);
      x = t / ((1.0 + t * e1) * (1.0 + t * e1));
      alpha = std::exp(-0.5 * z * z * x);
      u = uniform01(rng);
    }
  } else {
    while (x > t) {
      const double n = std_normal(rng);
      const double y = n * n;
      const double mu_y = mu * y;
      x = mu + 0.5 * mu * mu_y - 0.5 * mu * std::sqrt(4.0 * mu_y + mu_y * mu_y);
      if (uniform01(rng) > mu / (mu + x)) x = mu * mu / x;
    }
  }
  return x;
}

}  // namespace pg_detail

/// E[omega] for omega ~ PG(1, c): tanh(c/2) / (2c), 1/4 at c = 0.
inline double pg1_mean(double c) {
  const double a = std::abs(c);
  if (a < 1e-4) return 0.25 - a * a / 48.0;  // series; tanh(a/2)/(2a) loses digits here
  return std::tanh(0.5 * a) / (2.0 * a);
}

/// Var[omega] for omega ~ PG(1, c): (sinh c - c) / (4 c^3 cosh^2(c/2)), 1/24 at c = 0.
inline double pg1_variance(double c) {
  const double a = std::abs(c);
  if (a < 1e-3) return 1.0 / 24.0 - a * a / 120.0;
  if (a < 20.0) {
    const double ch = std::cosh(0.5 * a);
    return (std::sinh(a) - a) / (4.0 * a * a * a * ch * ch);
  }
  // sinh(a) / cosh^2(a/2) = 2 tanh(a/2); avoids overflow for large |c|.
  const double sech = 1.0 / std::cosh(0.5 * a);
  return (2.0 * std::tanh(0.5 * a) - a * sech * sech) / (4.0 * a * a * a);
}

/// One exact draw from PG(1, c). Throws DomainError for non-finite c and
/// NumericalError if the accept/reject loop exceeds its iteration cap.
template <class Rng>
double sample_pg1(double c, Rng& rng) {
  using namespace pg_detail;
  if (!std::isfinite(c)) throw DomainError("Polya-Gamma tilt must be finite");
  const double z = 0.5 * std::abs(c);
  const double k = std::numbers::pi * std::numbers::pi / 8.0 + 0.5 * z * z;
  const double p = 0.5 * std::numbers::pi * std::exp(-k * kTrunc) / k;
  const double q = 2.0 * std::exp(-z) * inverse_gaussian_cdf(kTrunc, z);
  const double mix = p / (p + q);

  for (int iter = 0; iter < kMaxIterations; ++iter) {
    double x;
    if (uniform01(rng) < mix)
      x = kTrunc + std_exponential(rng) / k;
    else
      x = truncated_inverse_gaussian(z, rng);

    double s = series_coef(0, x);
    const double y = uniform01(rng) * s;
    for (int n = 1;; ++n) {
      if (n % 2 == 1) {
        s -= series_coef(n, x);
        if (y <= s) return 0.25 * x;
      } else {
        s += series_coef(n, x);
        if (y > s) break;
      }
    }
  }
  throw NumericalError("Polya-Gamma sampler exceeded its iteration cap");
}

}  // namespace lpm
