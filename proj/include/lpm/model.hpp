// Linear predictor, likelihood and prior densities.
//
// Time indices are zero based throughout the library: t = 0 is the first
// time point, whose predictor uses item distances; t >= 1 uses the distance
// to the target.
#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "lpm/geometry.hpp"
#include "lpm/types.hpp"

namespace lpm {

inline double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
inline double logistic(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }
inline double logit(double p) { return std::log(p) - std::log1p(-p); }

inline double bernoulli_loglik(int y, double eta) { return y * eta - softplus(eta); }

inline double normal_logpdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

/// Positions of individual i at every time point (row t = time t).
inline Points individual_positions(const LatentState& s, int i, const Eigen::RowVectorXd& tgt) {
  const auto steps = s.lambda.cols();
  std::vector<double> rates(static_cast<std::size_t>(steps));
  for (Eigen::Index k = 0; k < steps; ++k) rates[static_cast<std::size_t>(k)] = s.lambda(i, k);
  return propagate_positions(s.a1.row(i), rates, tgt);
}

/// Distances entering the predictor, recomputed from the stored state.
struct DistanceTable {
  Matrix item;    // n x p: d(a_{i,1}, b_j)
  Matrix target;  // n x (T-1): d(a_{i,t}, target) for t >= 2
};

inline DistanceTable compute_distances(const LatentState& s, const MetricSpace& space) {
  const auto n = s.a1.rows(), p = s.B.rows(), steps = s.lambda.cols();
  DistanceTable d{Matrix(n, p), Matrix(n, steps)};
  const Eigen::RowVectorXd tgt = target(s.B);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) d.item(i, j) = distance(s.a1.row(i), s.B.row(j), space);
    if (steps > 0) {
      const Points pos = individual_positions(s, static_cast<int>(i), tgt);
      for (Eigen::Index k = 0; k < steps; ++k) d.target(i, k) = distance(pos.row(k + 1), tgt, space);
    }
  }
  return d;
}

/// Distance term of cell (i, j, t) from a precomputed table.
inline double cell_distance(const DistanceTable& d, int i, int j, int t) {
  return t == 0 ? d.item(i, j) : d.target(i, t - 1);
}

/// eta(i, j, t) = alpha_i + beta_j - gamma * distance term.
inline double linear_predictor(int i, int j, int t, const ModelParams& params, const LatentState& s,
                               const MetricSpace& space) {
  if (i < 0 || i >= params.alpha.size() || j < 0 || j >= params.beta.size() || t < 0 || t > s.lambda.cols())
    throw std::out_of_range("linear_predictor index out of range");
  double dist;
  if (t == 0) {
    dist = distance(s.a1.row(i), s.B.row(j), space);
  } else {
    const Eigen::RowVectorXd tgt = target(s.B);
    dist = distance(individual_positions(s, i, tgt).row(t), tgt, space);
  }
  return params.alpha(i) + params.beta(j) - params.gamma * dist;
}

/// Sum of Bernoulli log-likelihoods over observed cells.
inline double log_likelihood(const ResponseTensor& data, const ModelParams& params, const DistanceTable& d) {
  double ll = 0.0;
  for (int i = 0; i < data.n(); ++i)
    for (int t = 0; t < data.T(); ++t)
      for (int j = 0; j < data.p(); ++j) {
        if (!data.observed(i, j, t)) continue;
        const double eta = params.alpha(i) + params.beta(j) - params.gamma * cell_distance(d, i, j, t);
        ll += bernoulli_loglik(data.value(i, j, t), eta);
      }
  return ll;
}

inline double log_likelihood(const ResponseTensor& data, const ModelParams& params, const LatentState& s,
                             const MetricSpace& space) {
  return log_likelihood(data, params, compute_distances(s, space));
}

/// Per-observation log-likelihoods in cell index order, observed cells only.
inline std::vector<double> loglik_row(const ResponseTensor& data, const ModelParams& params, const DistanceTable& d) {
  std::vector<double> row;
  row.reserve(data.observed_count());
  for (int i = 0; i < data.n(); ++i)
    for (int t = 0; t < data.T(); ++t)
      for (int j = 0; j < data.p(); ++j) {
        if (!data.observed(i, j, t)) continue;
        const double eta = params.alpha(i) + params.beta(j) - params.gamma * cell_distance(d, i, j, t);
        row.push_back(bernoulli_loglik(data.value(i, j, t), eta));
      }
  return row;
}

/// Log prior density of a single position (H for individuals, G for items).
template <class A>
double position_log_prior(const Eigen::MatrixBase<A>& x, double sigma, const MetricSpace& space) {
  if (space.kind == Geometry::PoincareDisk) {
    if (!space.admissible(x)) return -INFINITY;
    return -std::log(std::numbers::pi * space.rho * space.rho);
  }
  double lp = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) lp += normal_logpdf(x(k), 0.0, sigma);
  return lp;
}

/// Log density of logit(lambda) under mixture component r.
inline double rate_log_prior(double logit_lambda, int r, const Hyperparams& h) {
  return r == 1 ? normal_logpdf(logit_lambda, h.mu1, h.sigma1) : normal_logpdf(logit_lambda, h.mu0, h.sigma0);
}

/// Joint log prior of all sampled quantities (rates on the logit scale).
inline double log_prior(const ModelParams& params, const LatentState& s, const Hyperparams& h,
                        const MetricSpace& space) {
  double lp = 0.0;
  const double sa = std::sqrt(params.sigma_alpha2);
  for (Eigen::Index i = 0; i < params.alpha.size(); ++i) lp += normal_logpdf(params.alpha(i), 0.0, sa);
  for (Eigen::Index j = 0; j < params.beta.size(); ++j) lp += normal_logpdf(params.beta(j), 0.0, h.sigma_beta);
  if (params.gamma < 0.0) return -INFINITY;
  lp += std::log(2.0) + normal_logpdf(params.gamma, 0.0, h.sigma_gamma);
  const double s2 = params.sigma_alpha2;
  lp += h.a_sigma_alpha * std::log(h.b_sigma_alpha) - std::lgamma(h.a_sigma_alpha) -
        (h.a_sigma_alpha + 1.0) * std::log(s2) - h.b_sigma_alpha / s2;
  for (Eigen::Index i = 0; i < s.a1.rows(); ++i) lp += position_log_prior(s.a1.row(i), h.sigma_a, space);
  for (Eigen::Index j = 0; j < s.B.rows(); ++j) lp += position_log_prior(s.B.row(j), h.sigma_b, space);
  const double log_beta_norm = std::lgamma(h.a_pi + h.b_pi) - std::lgamma(h.a_pi) - std::lgamma(h.b_pi);
  for (Eigen::Index i = 0; i < s.lambda.rows(); ++i)
    for (Eigen::Index k = 0; k < s.lambda.cols(); ++k) {
      const double pi = s.pi(i, k);
      const int r = s.r(i, k);
      lp += rate_log_prior(logit(s.lambda(i, k)), r, h);
      lp += r == 1 ? std::log(pi) : std::log1p(-pi);
      lp += log_beta_norm + (h.a_pi - 1.0) * std::log(pi) + (h.b_pi - 1.0) * std::log1p(-pi);
    }
  return lp;
}

inline double log_posterior(const ResponseTensor& data, const ModelParams& params, const LatentState& s,
                            const Hyperparams& h, const MetricSpace& space) {
  return log_likelihood(data, params, s, space) + log_prior(params, s, h, space);
}

}  // namespace lpm
