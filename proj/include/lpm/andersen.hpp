// Longitudinal Rasch baseline: logit(mu_{i,j,t}) = alpha_{i,t} + beta_j,
// fitted by Polya-Gamma Gibbs sampling with the same priors as the latent
// process model (alpha_{i,t} ~ N(0, sigma_alpha^2) iid).
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lpm/model.hpp"
#include "lpm/polya_gamma.hpp"
#include "lpm/random.hpp"
#include "lpm/types.hpp"

namespace lpm {

struct AndersenConfig {
  int iterations = 1000;
  int burnin = 500;
  int thin = 1;
  std::uint64_t seed = 1;
  Hyperparams hyper;

  int retained() const { return (iterations - burnin) / thin; }

  void validate() const {
    if (iterations < 1) throw ValidationError("iterations must be positive");
    if (burnin < 0 || burnin >= iterations) throw ValidationError("burn-in must satisfy 0 <= burnin < iterations");
    if (thin < 1) throw ValidationError("thin must be at least 1");
    hyper.validate();
  }
};

struct AndersenParams {
  Matrix alpha;  // n x T
  Vector beta;
  double sigma_alpha2 = 1.0;
};

struct AndersenDraw {
  int iteration = 0;
  AndersenParams params;
  std::vector<double> loglik;  // observed cells in tensor index order
};

struct AndersenSamples {
  int n = 0, p = 0, T = 0;
  AndersenConfig config;
  std::vector<AndersenDraw> draws;
};

inline std::vector<double> andersen_loglik_row(const ResponseTensor& data, const AndersenParams& a) {
  std::vector<double> row;
  row.reserve(data.observed_count());
  for (int i = 0; i < data.n(); ++i)
    for (int t = 0; t < data.T(); ++t)
      for (int j = 0; j < data.p(); ++j)
        if (data.observed(i, j, t)) row.push_back(bernoulli_loglik(data.value(i, j, t), a.alpha(i, t) + a.beta(j)));
  return row;
}

/// Gibbs sampler cycling omega, beta, alpha_{i,t} and sigma_alpha^2.
inline AndersenSamples fit_andersen(const ResponseTensor& data, const AndersenConfig& cfg) {
  cfg.validate();
  const int n = data.n(), p = data.p(), T = data.T();
  const auto& h = cfg.hyper;
  ChainRng rng(derive_seed(cfg.seed, 0x616e64ULL));
  AndersenParams cur{Matrix::Zero(n, T), Vector::Zero(p), 1.0};
  std::vector<double> omega(data.size(), 0.0);

  AndersenSamples out;
  out.n = n;
  out.p = p;
  out.T = T;
  out.config = cfg;
  out.draws.reserve(static_cast<std::size_t>(cfg.retained()));
  for (int it = 0; it < cfg.iterations; ++it) {
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < T; ++t)
        for (int j = 0; j < p; ++j) {
          if (!data.observed(i, j, t)) continue;
          const auto idx = data.index(i, j, t);
          SplitMix64 stream(derive_seed(cfg.seed, static_cast<std::uint64_t>(it), idx));
          omega[idx] = sample_pg1(cur.alpha(i, t) + cur.beta(j), stream);
        }
    for (int j = 0; j < p; ++j) {
      double prec = 1.0 / (h.sigma_beta * h.sigma_beta), num = 0.0;
      for (int i = 0; i < n; ++i)
        for (int t = 0; t < T; ++t) {
          if (!data.observed(i, j, t)) continue;
          const double w = omega[data.index(i, j, t)];
          prec += w;
          num += (data.value(i, j, t) - 0.5) - w * cur.alpha(i, t);
        }
      cur.beta(j) = num / prec + std_normal(rng) / std::sqrt(prec);
    }
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < T; ++t) {
        double prec = 1.0 / cur.sigma_alpha2, num = 0.0;
        for (int j = 0; j < p; ++j) {
          if (!data.observed(i, j, t)) continue;
          const double w = omega[data.index(i, j, t)];
          prec += w;
          num += (data.value(i, j, t) - 0.5) - w * cur.beta(j);
        }
        cur.alpha(i, t) = num / prec + std_normal(rng) / std::sqrt(prec);
      }
    cur.sigma_alpha2 = inverse_gamma_draw(h.a_sigma_alpha + 0.5 * static_cast<double>(n) * T,
                                          h.b_sigma_alpha + 0.5 * cur.alpha.squaredNorm(), rng);
    if (!std::isfinite(cur.sigma_alpha2) || !cur.alpha.allFinite() || !cur.beta.allFinite())
      throw NumericalError("non-finite value in the Andersen sampler after sweep " + std::to_string(it + 1));
    if (it >= cfg.burnin && (it - cfg.burnin + 1) % cfg.thin == 0)
      out.draws.push_back({it + 1, cur, andersen_loglik_row(data, cur)});
  }
  return out;
}

enum class RateStatus { InRegime, OutOfRegime, Undefined };

/// Progress rate implied by two abilities. In regime (alpha1 < 0 and
/// alpha1 <= alpha2 <= 0) the value is 1 - alpha2 / alpha1 in [0, 1];
/// outside it the raw ratio is reported unchanged.
struct AndersenRate {
  RateStatus status = RateStatus::Undefined;
  double value = 0.0;  // 1 - alpha2 / alpha1 whenever alpha1 != 0

  std::optional<double> lambda() const {
    if (status != RateStatus::InRegime) return std::nullopt;
    return value;
  }
};

inline AndersenRate andersen_progress(double alpha1, double alpha2) {
  if (!std::isfinite(alpha1) || !std::isfinite(alpha2)) throw DomainError("abilities must be finite");
  if (alpha1 == 0.0) return {RateStatus::Undefined, 0.0};
  const double v = 1.0 - alpha2 / alpha1;
  const bool in = alpha1 < 0.0 && alpha1 <= alpha2 && alpha2 <= 0.0;
  return {in ? RateStatus::InRegime : RateStatus::OutOfRegime, v};
}

inline std::string to_string(RateStatus s) {
  switch (s) {
    case RateStatus::InRegime: return "in-regime";
    case RateStatus::OutOfRegime: return "out-of-regime";
    case RateStatus::Undefined: return "undefined";
  }
  return "?";
}

}  // namespace lpm
