// Metropolis-within-Gibbs posterior sampler for the latent process model.
//
// One sweep cycles, in fixed order: Polya-Gamma auxiliaries, item weights,
// individual weights, sigma_alpha^2, gamma, rates of progress (MH on the
// logit scale), starting positions (MH), item positions (MH), mixture
// indicators with mixing proportions, and finally the item scale constraint.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "lpm/alignment.hpp"
#include "lpm/geometry.hpp"
#include "lpm/model.hpp"
#include "lpm/polya_gamma.hpp"
#include "lpm/random.hpp"
#include "lpm/types.hpp"

namespace lpm {

/// Where the item scale constraint is applied.
enum class ScaleMode {
  EverySweep,     // projected at the end of each sweep
  ReportingOnly,  // sampler runs unconstrained; retained draws are rescaled
};

inline std::string to_string(ScaleMode m) { return m == ScaleMode::EverySweep ? "sweep" : "reporting"; }
inline ScaleMode scale_mode_from_string(const std::string& s) {
  if (s == "sweep" || s == "every-sweep") return ScaleMode::EverySweep;
  if (s == "reporting" || s == "reporting-only") return ScaleMode::ReportingOnly;
  throw ValidationError("unknown scale mode '" + s + "' (expected sweep or reporting)");
}

/// Switches for individual sweep blocks; all on for normal runs.
struct UpdateMask {
  bool omega = true;
  bool beta = true;
  bool alpha = true;
  bool sigma_alpha2 = true;
  bool gamma = true;
  bool lambda = true;
  bool a1 = true;
  bool b = true;
  bool pi_r = true;
  bool scale = true;

  static UpdateMask none() { return {false, false, false, false, false, false, false, false, false, false}; }
};

struct ChainConfig {
  int iterations = 1000;
  int burnin = 500;
  int thin = 1;
  std::uint64_t seed = 1;
  double proposal_sd_a = 1.4;
  double proposal_sd_b = 0.8;
  double proposal_sd_lambda = 5.0;
  bool adapt = false;
  double adapt_target = 0.35;
  Hyperparams hyper;
  MetricSpace space = MetricSpace::euclidean(2);
  ScaleMode scale_mode = ScaleMode::EverySweep;
  UpdateMask updates;
  std::optional<double> fixed_gamma;

  int retained() const { return (iterations - burnin) / thin; }

  void validate() const {
    if (iterations < 1) throw ValidationError("iterations must be positive");
    if (burnin < 0 || burnin >= iterations) throw ValidationError("burn-in must satisfy 0 <= burnin < iterations");
    if (thin < 1) throw ValidationError("thin must be at least 1");
    if (!(proposal_sd_a > 0.0) || !(proposal_sd_b > 0.0) || !(proposal_sd_lambda > 0.0))
      throw ValidationError("proposal standard deviations must be positive");
    if (!(adapt_target > 0.0 && adapt_target < 1.0)) throw ValidationError("adaptation target must lie in (0, 1)");
    if (fixed_gamma && !(*fixed_gamma >= 0.0)) throw ValidationError("fixed gamma must be non-negative");
    hyper.validate();
    space.validate();
  }
};

struct AcceptanceCounter {
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;

  void record(bool ok) {
    ++proposed;
    accepted += ok ? 1 : 0;
  }
  std::optional<double> rate() const {
    if (proposed == 0) return std::nullopt;
    return static_cast<double>(accepted) / static_cast<double>(proposed);
  }
};

struct Acceptance {
  AcceptanceCounter lambda, a1, b;
};

/// One retained iteration.
struct Draw {
  int iteration = 0;
  ModelParams params;
  LatentState state;
  double log_posterior = 0.0;
  std::vector<double> loglik;  // observed cells in tensor index order
};

struct PosteriorSamples {
  int n = 0, p = 0, T = 0;
  ChainConfig config;
  std::vector<Draw> draws;
  Acceptance acceptance;  // post burn-in
  double final_sd_a = 0.0, final_sd_b = 0.0, final_sd_lambda = 0.0;

  const MetricSpace& space() const { return config.space; }
  std::uint64_t seed() const { return config.seed; }
};

// ---------------------------------------------------------------------------
// Full-conditional draws. Each takes the current auxiliaries explicitly; K is
// y - 1/2 for observed cells. Unobserved cells carry omega = 0 and are skipped.

/// Polya-Gamma auxiliaries for all observed cells; each cell draws from its
/// own substream derived from (seed, sweep, cell) so results do not depend
/// on evaluation order.
inline void update_omega(const ResponseTensor& data, const ModelParams& params, const DistanceTable& d,
                         std::uint64_t seed, std::uint64_t sweep, std::vector<double>& omega) {
  omega.assign(data.size(), 0.0);
  for (int i = 0; i < data.n(); ++i)
    for (int t = 0; t < data.T(); ++t)
      for (int j = 0; j < data.p(); ++j) {
        if (!data.observed(i, j, t)) continue;
        const auto idx = data.index(i, j, t);
        const double eta = params.alpha(i) + params.beta(j) - params.gamma * cell_distance(d, i, j, t);
        SplitMix64 stream(derive_seed(seed, sweep, idx));
        omega[idx] = sample_pg1(eta, stream);
      }
}

template <class Rng>
double update_beta(int j, const ResponseTensor& data, const std::vector<double>& omega, const ModelParams& params,
                   const DistanceTable& d, const Hyperparams& h, Rng& rng) {
  double prec = 1.0 / (h.sigma_beta * h.sigma_beta);
  double num = 0.0;
  for (int i = 0; i < data.n(); ++i)
    for (int t = 0; t < data.T(); ++t) {
      if (!data.observed(i, j, t)) continue;
      const double w = omega[data.index(i, j, t)];
      const double k = data.value(i, j, t) - 0.5;
      prec += w;
      num += k - w * (params.alpha(i) - params.gamma * cell_distance(d, i, j, t));
    }
  const double var = 1.0 / prec;
  return var * num + std::sqrt(var) * std_normal(rng);
}

template <class Rng>
double update_alpha(int i, const ResponseTensor& data, const std::vector<double>& omega, const ModelParams& params,
                    const DistanceTable& d, Rng& rng) {
  double prec = 1.0 / params.sigma_alpha2;
  double num = 0.0;
  for (int t = 0; t < data.T(); ++t)
    for (int j = 0; j < data.p(); ++j) {
      if (!data.observed(i, j, t)) continue;
      const double w = omega[data.index(i, j, t)];
      const double k = data.value(i, j, t) - 0.5;
      prec += w;
      num += k - w * (params.beta(j) - params.gamma * cell_distance(d, i, j, t));
    }
  const double var = 1.0 / prec;
  return var * num + std::sqrt(var) * std_normal(rng);
}

/// Inverse-Gamma(a + n/2, b + sum(alpha^2)/2).
template <class Rng>
double update_sigma_alpha2(const Vector& alpha, const Hyperparams& h, Rng& rng) {
  const double shape = h.a_sigma_alpha + 0.5 * static_cast<double>(alpha.size());
  const double scale = h.b_sigma_alpha + 0.5 * alpha.squaredNorm();
  return inverse_gamma_draw(shape, scale, rng);
}

/// Normal full conditional of gamma truncated to [0, inf).
template <class Rng>
double update_gamma(const ResponseTensor& data, const std::vector<double>& omega, const ModelParams& params,
                    const DistanceTable& d, const Hyperparams& h, Rng& rng) {
  double prec = 1.0 / (h.sigma_gamma * h.sigma_gamma);
  double num = 0.0;
  for (int i = 0; i < data.n(); ++i)
    for (int t = 0; t < data.T(); ++t)
      for (int j = 0; j < data.p(); ++j) {
        if (!data.observed(i, j, t)) continue;
        const double w = omega[data.index(i, j, t)];
        const double k = data.value(i, j, t) - 0.5;
        const double dist = cell_distance(d, i, j, t);
        prec += w * dist * dist;
        num += w * dist * (params.alpha(i) + params.beta(j)) - k * dist;
      }
  if (!(prec > 0.0)) throw NumericalError("gamma full conditional has non-positive precision");
  const double var = 1.0 / prec;
  return truncated_normal_positive(var * num, std::sqrt(var), rng);
}

/// Full-conditional P(r = 1 | lambda, pi): pi N1 / (pi N1 + (1 - pi) N0)
/// with the mixture densities evaluated at logit(lambda).
inline double inclusion_probability(double lambda, double pi, const Hyperparams& h) {
  const double x = logit(lambda);
  const double log_odds = std::log(pi) - std::log1p(-pi) + normal_logpdf(x, h.mu1, h.sigma1) -
                          normal_logpdf(x, h.mu0, h.sigma0);
  return logistic(log_odds);
}

/// Draws r ~ Bernoulli from its full conditional, then pi ~ Beta(a + r, b + 1 - r).
template <class Rng>
std::pair<double, int> update_pi_and_r(double lambda, double pi, const Hyperparams& h, Rng& rng) {
  const int r = uniform01(rng) < inclusion_probability(lambda, pi, h) ? 1 : 0;
  double new_pi = beta_draw(h.a_pi + r, h.b_pi + (1 - r), rng);
  // Beta draws can round to the closed endpoints for tiny shape parameters.
  new_pi = std::clamp(new_pi, 1e-300, 1.0 - 1e-16);
  return {new_pi, r};
}

// ---------------------------------------------------------------------------

/// Holds one chain: current parameters, latent state, auxiliaries, and the
/// distance cache kept consistent with the state after every update.
class Sampler {
 public:
  Sampler(const ResponseTensor& data, const ChainConfig& cfg) : data_(data), cfg_(cfg), rng_(main_seed(cfg.seed)) {
    cfg_.validate();
    initialize();
  }

  Sampler(const ResponseTensor& data, const ChainConfig& cfg, ModelParams params, LatentState state)
      : data_(data), cfg_(cfg), rng_(main_seed(cfg.seed)), params_(std::move(params)), state_(std::move(state)) {
    cfg_.validate();
    check_shapes();
    refresh();
  }

  const ModelParams& params() const { return params_; }
  const LatentState& state() const { return state_; }
  const DistanceTable& distances() const { return dist_; }
  const std::vector<double>& omega() const { return omega_; }
  const ChainConfig& config() const { return cfg_; }
  const Acceptance& acceptance() const { return acc_; }
  double sd_a() const { return sd_a_; }
  double sd_b() const { return sd_b_; }
  double sd_lambda() const { return sd_lambda_; }
  std::uint64_t sweeps_done() const { return sweep_; }

  /// Enables or disables acceptance bookkeeping (off during burn-in).
  void set_counting(bool on) { counting_ = on; }

  // --- individual blocks -------------------------------------------------

  void omega_step() { update_omega(data_, params_, dist_, cfg_.seed, sweep_, omega_); }

  void beta_step() {
    for (int j = 0; j < data_.p(); ++j) {
      params_.beta(j) = update_beta(j, data_, omega_, params_, dist_, cfg_.hyper, rng_);
      require_finite(params_.beta(j), "beta");
    }
  }

  void alpha_step() {
    for (int i = 0; i < data_.n(); ++i) {
      params_.alpha(i) = update_alpha(i, data_, omega_, params_, dist_, rng_);
      require_finite(params_.alpha(i), "alpha");
    }
  }

  void sigma_alpha2_step() {
    params_.sigma_alpha2 = update_sigma_alpha2(params_.alpha, cfg_.hyper, rng_);
    require_finite(params_.sigma_alpha2, "sigma_alpha2");
  }

  void gamma_step() {
    if (cfg_.fixed_gamma) return;
    params_.gamma = update_gamma(data_, omega_, params_, dist_, cfg_.hyper, rng_);
    require_finite(params_.gamma, "gamma");
  }

  /// MH update of lambda at rate column k (time point k + 2).
  bool lambda_step(int i, int k) {
    const double lam = state_.lambda(i, k);
    const double x = logit(lam);
    const double xs = x + sd_lambda_ * std_normal(rng_);
    const double lam_s = logistic(xs);
    bool ok = false;
    if (lam_s > 0.0 && lam_s < 1.0) {
      const int r = state_.r(i, k);
      std::vector<double> rates = rates_of(i);
      rates[static_cast<std::size_t>(k)] = lam_s;
      const Points prop = propagate_positions(state_.a1.row(i), rates, target_);
      std::vector<double> new_d(static_cast<std::size_t>(data_.T()), 0.0);
      double delta = rate_log_prior(xs, r, cfg_.hyper) - rate_log_prior(x, r, cfg_.hyper);
      for (int t = k + 1; t < data_.T(); ++t) {
        new_d[t] = distance(prop.row(t), target_, cfg_.space);
        delta += target_block_loglik(i, t, new_d[t]) - target_block_loglik(i, t, dist_.target(i, t - 1));
      }
      if (std::log(uniform01(rng_)) < delta) {
        ok = true;
        state_.lambda(i, k) = lam_s;
        for (int t = k + 1; t < data_.T(); ++t) dist_.target(i, t - 1) = new_d[t];
      }
    }
    if (counting_) acc_.lambda.record(ok);
    ++batch_prop_[0];
    batch_acc_[0] += ok;
    return ok;
  }

  /// MH update of the starting position of individual i.
  bool a1_step(int i) {
    const auto q = cfg_.space.q;
    Eigen::RowVectorXd prop = state_.a1.row(i);
    for (int c = 0; c < q; ++c) prop(c) += sd_a_ * std_normal(rng_);
    bool ok = false;
    if (cfg_.space.admissible(prop)) {
      double delta = position_log_prior(prop, cfg_.hyper.sigma_a, cfg_.space) -
                     position_log_prior(state_.a1.row(i), cfg_.hyper.sigma_a, cfg_.space);
      Eigen::RowVectorXd item_d(data_.p());
      for (int j = 0; j < data_.p(); ++j) item_d(j) = distance(prop, state_.B.row(j), cfg_.space);
      const Points pos = propagate_positions(prop, rates_of(i), target_);
      Eigen::RowVectorXd tgt_d(std::max(0, data_.T() - 1));
      for (int t = 1; t < data_.T(); ++t) tgt_d(t - 1) = distance(pos.row(t), target_, cfg_.space);

      for (int j = 0; j < data_.p(); ++j) {
        if (!data_.observed(i, j, 0)) continue;
        const double base = params_.alpha(i) + params_.beta(j);
        const int y = data_.value(i, j, 0);
        delta += bernoulli_loglik(y, base - params_.gamma * item_d(j)) -
                 bernoulli_loglik(y, base - params_.gamma * dist_.item(i, j));
      }
      for (int t = 1; t < data_.T(); ++t)
        delta += target_block_loglik(i, t, tgt_d(t - 1)) - target_block_loglik(i, t, dist_.target(i, t - 1));

      if (std::log(uniform01(rng_)) < delta) {
        ok = true;
        state_.a1.row(i) = prop;
        dist_.item.row(i) = item_d;
        if (data_.T() > 1) dist_.target.row(i) = tgt_d;
      }
    }
    if (counting_) acc_.a1.record(ok);
    ++batch_prop_[1];
    batch_acc_[1] += ok;
    return ok;
  }

  /// MH update of item position j; moves the target by delta / p.
  bool b_step(int j) {
    const auto q = cfg_.space.q;
    Eigen::RowVectorXd prop = state_.B.row(j);
    for (int c = 0; c < q; ++c) prop(c) += sd_b_ * std_normal(rng_);
    bool ok = false;
    if (cfg_.space.admissible(prop)) {
      const Eigen::RowVectorXd new_target = target_ + (prop - state_.B.row(j)) / static_cast<double>(data_.p());
      double delta = position_log_prior(prop, cfg_.hyper.sigma_b, cfg_.space) -
                     position_log_prior(state_.B.row(j), cfg_.hyper.sigma_b, cfg_.space);
      Eigen::VectorXd item_d(data_.n());
      Matrix tgt_d(data_.n(), std::max(0, data_.T() - 1));
      for (int i = 0; i < data_.n(); ++i) {
        item_d(i) = distance(state_.a1.row(i), prop, cfg_.space);
        if (data_.observed(i, j, 0)) {
          const double base = params_.alpha(i) + params_.beta(j);
          const int y = data_.value(i, j, 0);
          delta += bernoulli_loglik(y, base - params_.gamma * item_d(i)) -
                   bernoulli_loglik(y, base - params_.gamma * dist_.item(i, j));
        }
        if (data_.T() > 1) {
          const Points pos = propagate_positions(state_.a1.row(i), rates_of(i), new_target);
          for (int t = 1; t < data_.T(); ++t) {
            tgt_d(i, t - 1) = distance(pos.row(t), new_target, cfg_.space);
            delta += target_block_loglik(i, t, tgt_d(i, t - 1)) - target_block_loglik(i, t, dist_.target(i, t - 1));
          }
        }
      }
      if (std::log(uniform01(rng_)) < delta) {
        ok = true;
        state_.B.row(j) = prop;
        // Recompute rather than accumulate so the target never drifts.
        target_ = target(state_.B);
        dist_.item.col(j) = item_d;
        if (data_.T() > 1) dist_.target = tgt_d;
      }
    }
    if (counting_) acc_.b.record(ok);
    ++batch_prop_[2];
    batch_acc_[2] += ok;
    return ok;
  }

  void pi_r_step(int i, int k) {
    auto [pi, r] = update_pi_and_r(state_.lambda(i, k), state_.pi(i, k), cfg_.hyper, rng_);
    state_.pi(i, k) = pi;
    state_.r(i, k) = r;
  }

  void scale_step() {
    if (cfg_.scale_mode != ScaleMode::EverySweep) return;
    if (cfg_.fixed_gamma) return;  // rescaling would move a fixed gamma
    enforce_scale(state_, params_, cfg_.space);
    refresh();
  }

  /// One full cycle in the fixed block order.
  void sweep() {
    const auto& u = cfg_.updates;
    batch_prop_ = {0, 0, 0};
    batch_acc_ = {0, 0, 0};
    if (u.omega) omega_step();
    if (u.beta) beta_step();
    if (u.alpha) alpha_step();
    if (u.sigma_alpha2) sigma_alpha2_step();
    if (u.gamma) gamma_step();
    const int steps = data_.T() - 1;
    if (u.lambda)
      for (int i = 0; i < data_.n(); ++i)
        for (int k = 0; k < steps; ++k) lambda_step(i, k);
    if (u.a1)
      for (int i = 0; i < data_.n(); ++i) a1_step(i);
    if (u.b)
      for (int j = 0; j < data_.p(); ++j) b_step(j);
    if (u.pi_r)
      for (int i = 0; i < data_.n(); ++i)
        for (int k = 0; k < steps; ++k) pi_r_step(i, k);
    if (u.scale) scale_step();
    ++sweep_;
  }

  /// Robbins-Monro step on the log proposal scales using the acceptance
  /// fractions of the last sweep.
  void adapt(std::uint64_t iteration) {
    const double gain = std::pow(static_cast<double>(iteration) + 1.0, -0.6);
    double* sds[3] = {&sd_lambda_, &sd_a_, &sd_b_};
    for (int b = 0; b < 3; ++b) {
      if (batch_prop_[b] == 0) continue;
      const double frac = static_cast<double>(batch_acc_[b]) / static_cast<double>(batch_prop_[b]);
      *sds[b] = std::clamp(*sds[b] * std::exp(gain * (frac - cfg_.adapt_target)), 1e-4, 1e3);
    }
  }

  double log_likelihood() const { return lpm::log_likelihood(data_, params_, dist_); }
  double log_posterior() const { return log_likelihood() + log_prior(params_, state_, cfg_.hyper, cfg_.space); }

 private:
  static std::uint64_t main_seed(std::uint64_t seed) { return derive_seed(seed, 0x6d61696eULL); }

  void initialize() {
    const int n = data_.n(), p = data_.p(), steps = data_.T() - 1, q = cfg_.space.q;
    params_.alpha = Vector::Zero(n);
    params_.beta = Vector::Zero(p);
    params_.gamma = cfg_.fixed_gamma.value_or(1.0);
    params_.sigma_alpha2 = 1.0;
    state_.a1 = Points(n, q);
    state_.B = Points(p, q);
    auto init_point = [&](auto row) {
      if (cfg_.space.kind == Geometry::Euclidean) {
        for (int c = 0; c < q; ++c) row(c) = 0.1 * std_normal(rng_);
      } else {
        const double rad = 0.9 * cfg_.space.rho * std::sqrt(uniform01(rng_));
        const double ang = 2.0 * std::numbers::pi * uniform01(rng_);
        row(0) = rad * std::cos(ang);
        row(1) = rad * std::sin(ang);
      }
    };
    for (int i = 0; i < n; ++i) init_point(state_.a1.row(i));
    for (int j = 0; j < p; ++j) init_point(state_.B.row(j));
    state_.lambda = Matrix::Constant(n, steps, 0.1);
    state_.pi = Matrix::Constant(n, steps, 0.5);
    state_.r = IntMatrix(n, steps);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < steps; ++k) state_.r(i, k) = uniform01(rng_) < 0.5 ? 1 : 0;
    refresh();
  }

  void check_shapes() const {
    const int n = data_.n(), p = data_.p(), steps = data_.T() - 1, q = cfg_.space.q;
    if (params_.alpha.size() != n || params_.beta.size() != p) throw ValidationError("initial weights have wrong size");
    if (state_.a1.rows() != n || state_.a1.cols() != q || state_.B.rows() != p || state_.B.cols() != q)
      throw ValidationError("initial positions have wrong shape");
    if (state_.lambda.rows() != n || state_.lambda.cols() != steps || state_.r.rows() != n ||
        state_.r.cols() != steps || state_.pi.rows() != n || state_.pi.cols() != steps)
      throw ValidationError("initial rates have wrong shape");
    for (int i = 0; i < n; ++i)
      if (!cfg_.space.admissible(state_.a1.row(i))) throw DomainError("initial position outside the metric space");
    for (int j = 0; j < p; ++j)
      if (!cfg_.space.admissible(state_.B.row(j))) throw DomainError("initial item outside the metric space");
    params_.validate();
  }

  void refresh() {
    target_ = target(state_.B);
    dist_ = compute_distances(state_, cfg_.space);
    if (omega_.size() != data_.size()) omega_.assign(data_.size(), 0.0);
  }

  std::vector<double> rates_of(int i) const {
    std::vector<double> r(static_cast<std::size_t>(state_.lambda.cols()));
    for (Eigen::Index k = 0; k < state_.lambda.cols(); ++k) r[static_cast<std::size_t>(k)] = state_.lambda(i, k);
    return r;
  }

  /// Log-likelihood of the cells of individual i at time t >= 1 given its
  /// distance to the target.
  double target_block_loglik(int i, int t, double dist) const {
    double ll = 0.0;
    const double base = params_.alpha(i) - params_.gamma * dist;
    for (int j = 0; j < data_.p(); ++j) {
      if (!data_.observed(i, j, t)) continue;
      ll += bernoulli_loglik(data_.value(i, j, t), base + params_.beta(j));
    }
    return ll;
  }

  static void require_finite(double v, const char* block) {
    if (!std::isfinite(v)) throw NumericalError(std::string("non-finite value produced by the ") + block + " update");
  }

  const ResponseTensor& data_;
  ChainConfig cfg_;
  ChainRng rng_;
  ModelParams params_;
  LatentState state_;
  DistanceTable dist_;
  Eigen::RowVectorXd target_;
  std::vector<double> omega_;
  Acceptance acc_;
  bool counting_ = true;
  std::uint64_t sweep_ = 0;
  double sd_a_ = cfg_.proposal_sd_a;
  double sd_b_ = cfg_.proposal_sd_b;
  double sd_lambda_ = cfg_.proposal_sd_lambda;
  std::array<std::uint64_t, 3> batch_prop_{}, batch_acc_{};
};

/// Snapshot of the sampler as a retained draw. Under ReportingOnly the
/// scale constraint is applied to the stored copy.
inline Draw snapshot(const Sampler& s, const ResponseTensor& data, int iteration) {
  Draw d;
  d.iteration = iteration;
  d.params = s.params();
  d.state = s.state();
  const auto& cfg = s.config();
  if (cfg.scale_mode == ScaleMode::ReportingOnly && !cfg.fixed_gamma && cfg.updates.scale)
    enforce_scale(d.state, d.params, cfg.space);
  const DistanceTable dt = compute_distances(d.state, cfg.space);
  d.loglik = loglik_row(data, d.params, dt);
  double ll = 0.0;
  for (double v : d.loglik) ll += v;
  d.log_posterior = ll + log_prior(d.params, d.state, cfg.hyper, cfg.space);
  return d;
}

/// Runs one chain: `iterations` sweeps, discarding `burnin` and keeping
/// every `thin`-th sweep afterwards. Proposal adaptation (if enabled) runs
/// during burn-in only.
inline PosteriorSamples run_chain(const ResponseTensor& data, const ChainConfig& cfg,
                                  std::optional<std::pair<ModelParams, LatentState>> init = std::nullopt) {
  cfg.validate();
  Sampler s = init ? Sampler(data, cfg, init->first, init->second) : Sampler(data, cfg);
  PosteriorSamples out;
  out.n = data.n();
  out.p = data.p();
  out.T = data.T();
  out.config = cfg;
  out.draws.reserve(static_cast<std::size_t>(cfg.retained()));
  s.set_counting(false);
  for (int it = 0; it < cfg.iterations; ++it) {
    if (it == cfg.burnin) s.set_counting(true);
    s.sweep();
    if (cfg.adapt && it < cfg.burnin) s.adapt(static_cast<std::uint64_t>(it));
    const double ll = s.log_likelihood();
    if (!std::isfinite(ll))
      throw NumericalError("non-finite log-likelihood after sweep " + std::to_string(it + 1));
    if (it >= cfg.burnin && (it - cfg.burnin + 1) % cfg.thin == 0) out.draws.push_back(snapshot(s, data, it + 1));
  }
  out.acceptance = s.acceptance();
  out.final_sd_a = s.sd_a();
  out.final_sd_b = s.sd_b();
  out.final_sd_lambda = s.sd_lambda();
  return out;
}

}  // namespace lpm
