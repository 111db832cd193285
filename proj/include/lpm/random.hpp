// Random number generation helpers.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace lpm {

/// SplitMix64. Cheap to seed, so one engine per observation and sweep is
/// affordable; satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Mixes a parent seed with stream coordinates into an independent seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  SplitMix64 g(seed ^ (a * 0xd1342543de82ef95ULL));
  g();
  std::uint64_t s = g() ^ (b * 0xaf251af3b0f025b5ULL);
  SplitMix64 h(s);
  h();
  return h();
}

using ChainRng = std::mt19937_64;

/// Uniform on the open interval (0, 1).
template <class Rng>
double uniform01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

template <class Rng>
double std_normal(Rng& rng) {
  // Box-Muller without caching so that the draw count per call is fixed.
  const double u1 = uniform01(rng), u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

template <class Rng>
double std_exponential(Rng& rng) {
  return -std::log(uniform01(rng));
}

template <class Rng>
double gamma_draw(double shape, double rate, Rng& rng) {
  std::gamma_distribution<double> g(shape, 1.0 / rate);
  return g(rng);
}

template <class Rng>
double beta_draw(double a, double b, Rng& rng) {
  const double x = gamma_draw(a, 1.0, rng);
  const double y = gamma_draw(b, 1.0, rng);
  return x / (x + y);
}

/// Inverse-Gamma(shape, scale) with density proportional to x^{-shape-1} exp(-scale/x).
template <class Rng>
double inverse_gamma_draw(double shape, double scale, Rng& rng) {
  return 1.0 / gamma_draw(shape, scale, rng);
}

/// N(mean, sd^2) truncated to [0, inf). Uses the exponential-proposal
/// rejection sampler of Robert (1995) when the mass above zero is small.
template <class Rng>
double truncated_normal_positive(double mean, double sd, Rng& rng) {
  const double lower = -mean / sd;  // standardized truncation point
  if (lower < 0.5) {
    for (;;) {
      const double z = std_normal(rng);
      if (z >= lower) return mean + sd * z;
    }
  }
  const double alpha = 0.5 * (lower + std::sqrt(lower * lower + 4.0));
  for (;;) {
    const double z = lower + std_exponential(rng) / alpha;
    const double d = z - alpha;
    if (uniform01(rng) <= std::exp(-0.5 * d * d)) return mean + sd * z;
  }
}

}  // namespace lpm
