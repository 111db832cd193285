// Model comparison, convergence gating, acceptance reporting and posterior
// predictive checks over retained posterior samples.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <boost/math/distributions/chi_squared.hpp>

#include "lpm/mcmc.hpp"
#include "lpm/model.hpp"
#include "lpm/random.hpp"
#include "lpm/stats.hpp"
#include "lpm/types.hpp"

namespace lpm {

// ---------------------------------------------------------------------------
// WAIC

struct WaicResult {
  double lppd = 0.0;
  double p_waic = 0.0;
  double elpd_waic = 0.0;
  double waic = 0.0;
};

/// WAIC from an S x N matrix of pointwise log-likelihoods (rows are
/// posterior samples, columns observations).
inline WaicResult waic(const Matrix& loglik) {
  const auto S = loglik.rows(), N = loglik.cols();
  if (S < 2) throw ValidationError("WAIC needs at least two posterior samples");
  if (!loglik.allFinite()) throw NumericalError("WAIC input contains non-finite log-likelihoods");
  WaicResult r;
  const double log_s = std::log(static_cast<double>(S));
  for (Eigen::Index c = 0; c < N; ++c) {
    const auto col = loglik.col(c);
    const double mx = col.maxCoeff();
    r.lppd += mx + std::log((col.array() - mx).exp().sum()) - log_s;
    const double m = col.mean();
    r.p_waic += (col.array() - m).square().sum() / static_cast<double>(S - 1);
  }
  r.elpd_waic = r.lppd - r.p_waic;
  r.waic = -2.0 * r.elpd_waic;
  return r;
}

/// Stacks the per-draw log-likelihood rows into an S x N matrix.
inline Matrix loglik_matrix(const PosteriorSamples& samples) {
  if (samples.draws.empty()) throw ValidationError("no retained samples");
  const auto S = static_cast<Eigen::Index>(samples.draws.size());
  const auto N = static_cast<Eigen::Index>(samples.draws.front().loglik.size());
  Matrix m(S, N);
  for (Eigen::Index s = 0; s < S; ++s) {
    const auto& row = samples.draws[static_cast<std::size_t>(s)].loglik;
    if (static_cast<Eigen::Index>(row.size()) != N) throw ValidationError("ragged log-likelihood rows");
    for (Eigen::Index c = 0; c < N; ++c) m(s, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

inline WaicResult waic(const PosteriorSamples& samples) { return waic(loglik_matrix(samples)); }

// ---------------------------------------------------------------------------
// Multivariate PSRF

struct PsrfResult {
  double psrf = 0.0;
  double cutoff = 0.0;
  int n_params = 0;
  int n_chains = 0;
  int n_samples = 0;
  int batch_size = 0;

  bool converged() const { return psrf <= cutoff; }
};

/// Minimum effective sample size for a p-dimensional estimate with
/// confidence 1 - alpha and relative precision eps.
inline double min_ess(int p, double alpha = 0.05, double eps = 0.05) {
  if (p < 1) throw ValidationError("min_ess needs at least one parameter");
  const double dp = static_cast<double>(p);
  boost::math::chi_squared chi(dp);
  const double crit = boost::math::quantile(chi, 1.0 - alpha);
  const double log_ess = (2.0 / dp) * std::log(2.0) + std::log(std::numbers::pi) -
                         (2.0 / dp) * (std::log(dp) + std::lgamma(dp / 2.0)) + std::log(crit) -
                         2.0 * std::log(eps);
  return std::exp(log_ess);
}

/// PSRF threshold implied by the minimum effective sample size for
/// `n_chains` chains and `p` parameters.
inline double psrf_cutoff(int p, int n_chains, double alpha = 0.05, double eps = 0.05) {
  if (n_chains < 1) throw ValidationError("psrf cutoff needs at least one chain");
  return std::sqrt(1.0 + static_cast<double>(n_chains) / min_ess(p, alpha, eps));
}

namespace detail {
inline double log_det_spd(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw NumericalError("degenerate chains: covariance estimate is rank deficient");
  const auto& l = llt.matrixL();
  double ld = 0.0;
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    const double v = l(k, k);
    if (!(v > 0.0) || !std::isfinite(v))
      throw NumericalError("degenerate chains: covariance estimate is rank deficient");
    ld += 2.0 * std::log(v);
  }
  return ld;
}
}  // namespace detail

/// Stable multivariate PSRF: the determinant ratio of a replicated batch
/// means estimate of the asymptotic covariance to the mean within-chain
/// sample covariance. Each chain is S x d with rows as iterations.
inline PsrfResult psrf_multivariate(const std::vector<Matrix>& chains, double alpha = 0.05, double eps = 0.05) {
  const int R = static_cast<int>(chains.size());
  if (R < 2) throw ValidationError("PSRF needs at least two chains");
  const auto S = chains.front().rows(), d = chains.front().cols();
  for (const auto& c : chains)
    if (c.rows() != S || c.cols() != d) throw ValidationError("PSRF chains differ in shape");
  if (d < 1) throw ValidationError("PSRF needs at least one parameter");
  const auto b = static_cast<Eigen::Index>(std::floor(std::sqrt(static_cast<double>(S))));
  if (b < 1 || S < 2 * b) throw ValidationError("chains are too short for batch means");
  const Eigen::Index a = S / b;
  // The batch-means covariance has rank at most a*R - 1.
  if (a * R - 1 < d)
    throw NumericalError("degenerate chains: " + std::to_string(a * R) + " batch means cannot estimate a " +
                         std::to_string(d) + "-parameter covariance; run longer or more chains");

  Eigen::RowVectorXd grand = Eigen::RowVectorXd::Zero(d);
  for (const auto& c : chains) grand += c.colwise().mean();
  grand /= R;

  Matrix within = Matrix::Zero(d, d);
  Matrix rbm = Matrix::Zero(d, d);
  for (const auto& c : chains) {
    const Eigen::RowVectorXd m = c.colwise().mean();
    const Matrix centered = c.rowwise() - m;
    within.noalias() += centered.transpose() * centered / static_cast<double>(S - 1);
    for (Eigen::Index k = 0; k < a; ++k) {
      const Eigen::RowVectorXd bm = c.middleRows(k * b, b).colwise().mean() - grand;
      rbm.noalias() += bm.transpose() * bm;
    }
  }
  within /= R;
  rbm *= static_cast<double>(b) / static_cast<double>(a * R - 1);

  const double log_ratio = (detail::log_det_spd(rbm) - detail::log_det_spd(within)) / static_cast<double>(d);
  const double n = static_cast<double>(S);
  PsrfResult out;
  out.psrf = std::sqrt((n - 1.0) / n + std::exp(log_ratio) / n);
  out.cutoff = psrf_cutoff(static_cast<int>(d), R, alpha, eps);
  out.n_params = static_cast<int>(d);
  out.n_chains = R;
  out.n_samples = static_cast<int>(S);
  out.batch_size = static_cast<int>(b);
  if (!std::isfinite(out.psrf)) throw NumericalError("PSRF is not finite");
  return out;
}

/// Parameter vector entering the PSRF: alpha, beta, gamma, sigma_alpha^2
/// and logit(lambda). Gamma is left out when it was held fixed.
inline Vector psrf_vector(const Draw& d, bool include_gamma = true) {
  const auto n = d.params.alpha.size(), p = d.params.beta.size();
  const auto nl = d.state.lambda.size();
  Vector v(n + p + (include_gamma ? 1 : 0) + 1 + nl);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) v(k++) = d.params.alpha(i);
  for (Eigen::Index j = 0; j < p; ++j) v(k++) = d.params.beta(j);
  if (include_gamma) v(k++) = d.params.gamma;
  v(k++) = d.params.sigma_alpha2;
  for (Eigen::Index i = 0; i < d.state.lambda.rows(); ++i)
    for (Eigen::Index c = 0; c < d.state.lambda.cols(); ++c) v(k++) = logit(d.state.lambda(i, c));
  return v;
}

inline PsrfResult psrf_multivariate(const std::vector<PosteriorSamples>& runs) {
  if (runs.size() < 2) throw ValidationError("PSRF needs at least two chains");
  const bool with_gamma = !runs.front().config.fixed_gamma;
  std::vector<Matrix> chains;
  for (const auto& run : runs) {
    if (run.draws.empty()) throw ValidationError("chain has no retained samples");
    const auto S = static_cast<Eigen::Index>(run.draws.size());
    Matrix m(S, psrf_vector(run.draws.front(), with_gamma).size());
    for (Eigen::Index s = 0; s < S; ++s) m.row(s) = psrf_vector(run.draws[static_cast<std::size_t>(s)], with_gamma);
    chains.push_back(std::move(m));
  }
  return psrf_multivariate(chains);
}

// ---------------------------------------------------------------------------
// Acceptance

struct BlockAcceptance {
  std::string block;
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
  std::optional<double> rate;  // absent when nothing was proposed
  bool flagged = false;        // outside (0.3, 0.4) by more than 0.1
};

inline BlockAcceptance block_acceptance(const std::string& name, const AcceptanceCounter& c) {
  BlockAcceptance b{name, c.proposed, c.accepted, c.rate(), false};
  if (b.rate) b.flagged = *b.rate < 0.2 - 1e-12 || *b.rate > 0.5 + 1e-12;
  return b;
}

inline std::vector<BlockAcceptance> acceptance_report(const Acceptance& acc) {
  return {block_acceptance("lambda", acc.lambda), block_acceptance("a1", acc.a1), block_acceptance("b", acc.b)};
}

inline std::vector<BlockAcceptance> acceptance_report(const PosteriorSamples& samples) {
  return acceptance_report(samples.acceptance);
}

// ---------------------------------------------------------------------------
// Posterior predictive checks

/// Observed and predicted share of positive responses of one individual at
/// one time point (t is zero based).
struct PredictiveRow {
  int individual = 0;
  int time = 0;
  int n_observed = 0;
  double observed = 0.0;
  double lo = 0.0, mid = 0.0, hi = 0.0;  // 2.5%, 50%, 97.5%

  bool covered() const { return observed >= lo && observed <= hi; }
};

struct PredictiveResult {
  std::vector<PredictiveRow> rows;
  Matrix draws;  // n_draws x rows: predicted proportions
};

/// Simulates replicated responses on the observed cells from `n_draws`
/// retained samples (cycled when more are requested than were retained).
template <class Rng>
PredictiveResult posterior_predictive(const ResponseTensor& data, const PosteriorSamples& samples, int n_draws,
                                      Rng& rng) {
  if (samples.draws.empty()) throw ValidationError("posterior predictive needs retained samples");
  if (n_draws < 1) throw ValidationError("number of predictive draws must be positive");
  if (samples.n != data.n() || samples.p != data.p() || samples.T != data.T())
    throw ValidationError("samples and data differ in dimensions");
  PredictiveResult out;
  for (int i = 0; i < data.n(); ++i)
    for (int t = 0; t < data.T(); ++t) {
      PredictiveRow row{i, t, 0, 0.0};
      for (int j = 0; j < data.p(); ++j)
        if (data.observed(i, j, t)) {
          ++row.n_observed;
          row.observed += data.value(i, j, t);
        }
      if (row.n_observed == 0) continue;
      row.observed /= row.n_observed;
      out.rows.push_back(row);
    }
  out.draws = Matrix(n_draws, static_cast<Eigen::Index>(out.rows.size()));
  const auto S = samples.draws.size();
  for (int s = 0; s < n_draws; ++s) {
    const Draw& d = samples.draws[static_cast<std::size_t>(s) % S];
    const DistanceTable dt = compute_distances(d.state, samples.space());
    for (std::size_t r = 0; r < out.rows.size(); ++r) {
      const auto& row = out.rows[r];
      int ones = 0;
      for (int j = 0; j < data.p(); ++j) {
        if (!data.observed(row.individual, j, row.time)) continue;
        const double eta = d.params.alpha(row.individual) + d.params.beta(j) -
                           d.params.gamma * cell_distance(dt, row.individual, j, row.time);
        ones += uniform01(rng) < logistic(eta) ? 1 : 0;
      }
      out.draws(s, static_cast<Eigen::Index>(r)) = static_cast<double>(ones) / row.n_observed;
    }
  }
  for (std::size_t r = 0; r < out.rows.size(); ++r) {
    const auto col = out.draws.col(static_cast<Eigen::Index>(r));
    const auto q = quantiles(std::vector<double>(col.begin(), col.end()), {0.025, 0.5, 0.975});
    out.rows[r].lo = q[0];
    out.rows[r].mid = q[1];
    out.rows[r].hi = q[2];
  }
  return out;
}

/// Fraction of rows at time t whose observed proportion lies inside the
/// predictive interval.
inline double predictive_coverage(const PredictiveResult& ppc, int t) {
  int total = 0, inside = 0;
  for (const auto& row : ppc.rows) {
    if (row.time != t) continue;
    ++total;
    inside += row.covered() ? 1 : 0;
  }
  if (total == 0) throw ValidationError("no predictive rows at the requested time point");
  return static_cast<double>(inside) / total;
}

}  // namespace lpm
