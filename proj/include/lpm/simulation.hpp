// Synthetic data generation and replicated fitting studies across latent
// dimensions.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lpm/alignment.hpp"
#include "lpm/diagnostics.hpp"
#include "lpm/geometry.hpp"
#include "lpm/mcmc.hpp"
#include "lpm/progress.hpp"
#include "lpm/random.hpp"
#include "lpm/stats.hpp"
#include "lpm/types.hpp"

namespace lpm {

/// Groups of individuals answering p items with a shared success
/// probability at time 1 and a group-specific one at time 2.
struct GroupScenario {
  std::vector<int> group_sizes;
  int p = 10;
  double t1_prob = 0.2;
  std::vector<double> t2_probs;
  std::uint64_t seed = 1;

  int n() const {
    int s = 0;
    for (int g : group_sizes) s += g;
    return s;
  }

  void validate() const {
    if (group_sizes.empty()) throw ValidationError("scenario needs at least one group");
    if (group_sizes.size() != t2_probs.size()) throw ValidationError("one time-2 probability per group is required");
    for (int g : group_sizes)
      if (g < 1) throw ValidationError("group sizes must be positive");
    if (p < 1) throw ValidationError("item count must be positive");
    auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!in_unit(t1_prob)) throw ValidationError("probabilities must lie in (0, 1)");
    for (double v : t2_probs)
      if (!in_unit(v)) throw ValidationError("probabilities must lie in (0, 1)");
  }
};

/// Three groups of 100 moving from .2 to .25, .5 and .75.
inline GroupScenario n300_scenario(std::uint64_t seed = 1) { return {{100, 100, 100}, 10, 0.2, {0.25, 0.5, 0.75}, seed}; }

/// Four groups of 150 moving from .2 to .3, .5, .7 and .9.
inline GroupScenario n600_scenario(std::uint64_t seed = 1) {
  return {{150, 150, 150, 150}, 10, 0.2, {0.3, 0.5, 0.7, 0.9}, seed};
}

struct ScenarioData {
  ResponseTensor data;
  std::vector<std::string> group_of;  // label per individual: G1, G2, ...
  std::vector<int> group_index;       // zero-based group per individual
};

/// Independent Bernoulli responses; not generated from the latent process
/// model.
inline ScenarioData generate_group_scenario(const GroupScenario& sc) {
  sc.validate();
  ChainRng rng(derive_seed(sc.seed, 0x73696dULL));
  ScenarioData out{ResponseTensor(sc.n(), sc.p, 2), {}, {}};
  int i = 0;
  for (std::size_t g = 0; g < sc.group_sizes.size(); ++g)
    for (int k = 0; k < sc.group_sizes[g]; ++k, ++i) {
      out.group_of.push_back("G" + std::to_string(g + 1));
      out.group_index.push_back(static_cast<int>(g));
      for (int j = 0; j < sc.p; ++j) {
        out.data.set(i, j, 0, uniform01(rng) < sc.t1_prob ? 1 : 0);
        out.data.set(i, j, 1, uniform01(rng) < sc.t2_probs[g] ? 1 : 0);
      }
    }
  return out;
}

// ---------------------------------------------------------------------------
// Model-based generation

/// Draws every quantity from the prior. In Euclidean space the draw is
/// then rescaled so that the item scale constraint holds.
template <class Rng>
std::pair<ModelParams, LatentState> draw_from_prior(int n, int p, int T, const MetricSpace& space, const Hyperparams& h,
                                                    Rng& rng) {
  space.validate();
  ModelParams params;
  LatentState s;
  params.sigma_alpha2 = inverse_gamma_draw(h.a_sigma_alpha, h.b_sigma_alpha, rng);
  params.alpha = Vector(n);
  for (int i = 0; i < n; ++i) params.alpha(i) = std::sqrt(params.sigma_alpha2) * std_normal(rng);
  params.beta = Vector(p);
  for (int j = 0; j < p; ++j) params.beta(j) = h.sigma_beta * std_normal(rng);
  params.gamma = std::abs(h.sigma_gamma * std_normal(rng));
  auto point = [&](auto row, double sd) {
    if (space.kind == Geometry::Euclidean) {
      for (int c = 0; c < space.q; ++c) row(c) = sd * std_normal(rng);
    } else {
      const double rad = space.rho * std::sqrt(uniform01(rng));
      const double ang = 2.0 * std::numbers::pi * uniform01(rng);
      row(0) = rad * std::cos(ang);
      row(1) = rad * std::sin(ang);
    }
  };
  s.a1 = Points(n, space.q);
  s.B = Points(p, space.q);
  for (int i = 0; i < n; ++i) point(s.a1.row(i), h.sigma_a);
  for (int j = 0; j < p; ++j) point(s.B.row(j), h.sigma_b);
  s.lambda = Matrix(n, T - 1);
  s.r = IntMatrix(n, T - 1);
  s.pi = Matrix(n, T - 1);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < T - 1; ++k) {
      const double pi = std::clamp(beta_draw(h.a_pi, h.b_pi, rng), 1e-12, 1.0 - 1e-12);
      const int r = uniform01(rng) < pi ? 1 : 0;
      const double x = r == 1 ? h.mu1 + h.sigma1 * std_normal(rng) : h.mu0 + h.sigma0 * std_normal(rng);
      s.pi(i, k) = pi;
      s.r(i, k) = r;
      s.lambda(i, k) = std::clamp(logistic(x), 1e-12, 1.0 - 1e-12);
    }
  enforce_scale(s, params, space);
  return {params, s};
}

/// Responses drawn from the latent process model at the given parameters.
template <class Rng>
ResponseTensor generate_from_model(const ModelParams& params, const LatentState& s, const MetricSpace& space, int T,
                                   Rng& rng) {
  const int n = static_cast<int>(params.alpha.size()), p = static_cast<int>(params.beta.size());
  ResponseTensor y(n, p, T);
  const DistanceTable d = compute_distances(s, space);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < T; ++t)
      for (int j = 0; j < p; ++j) {
        const double eta = params.alpha(i) + params.beta(j) - params.gamma * cell_distance(d, i, j, t);
        y.set(i, j, t, uniform01(rng) < logistic(eta) ? 1 : 0);
      }
  return y;
}

// ---------------------------------------------------------------------------
// Chain presets

/// Chain lengths and proposal scales for the two simulation studies,
/// divided by `shorten` (lengths only; proposal scales are kept).
inline ChainConfig study_chain_config(int study_n, int q, int shorten = 1) {
  struct Row {
    int iterations, burnin;
    double sd_a, sd_b, sd_lambda;
  };
  static const std::map<std::pair<int, int>, Row> table = {
      {{300, 1}, {45000, 30000, 1.7, 0.6, 5.0}}, {{300, 2}, {65000, 50000, 1.4, 0.8, 5.0}},
      {{300, 3}, {85000, 70000, 1.0, 0.6, 5.0}}, {{300, 4}, {85000, 70000, 0.9, 0.3, 5.0}},
      {{600, 1}, {45000, 30000, 1.8, 0.1, 5.0}}, {{600, 2}, {65000, 50000, 1.4, 0.3, 5.0}},
      {{600, 3}, {85000, 70000, 0.8, 0.15, 5.0}}, {{600, 4}, {85000, 70000, 0.7, 0.08, 5.0}},
  };
  const auto it = table.find({study_n, q});
  if (it == table.end()) throw ValidationError("no preset for n=" + std::to_string(study_n) + ", q=" + std::to_string(q));
  if (shorten < 1) throw ValidationError("shortening factor must be at least 1");
  ChainConfig cfg;
  cfg.iterations = it->second.iterations / shorten;
  cfg.burnin = it->second.burnin / shorten;
  cfg.proposal_sd_a = it->second.sd_a;
  cfg.proposal_sd_b = it->second.sd_b;
  cfg.proposal_sd_lambda = it->second.sd_lambda;
  cfg.space = MetricSpace::euclidean(q);
  return cfg;
}

// ---------------------------------------------------------------------------
// Replication studies

struct StudyConfig {
  GroupScenario scenario;
  std::vector<int> q_list{1, 2, 3};
  std::function<ChainConfig(int q)> chain_for_q;
  int n_reps = 10;
  std::uint64_t seed = 1;
  double threshold = 0.5;
  int ppc_draws = 1000;

  void validate() const {
    scenario.validate();
    if (q_list.empty()) throw ValidationError("study needs at least one dimension");
    if (n_reps < 1) throw ValidationError("study needs at least one replicate");
    if (!chain_for_q) throw ValidationError("study needs a chain configuration per dimension");
    if (ppc_draws < 1) throw ValidationError("predictive draws must be positive");
  }
};

struct GroupResult {
  std::string group;
  double mean_median_lambda = 0.0;
  int negligible = 0;
  int total = 0;

  double negligible_share() const { return total > 0 ? static_cast<double>(negligible) / total : 0.0; }
};

struct DimensionFit {
  int q = 0;
  WaicResult waic;
  std::vector<GroupResult> groups;
  double ppc_coverage_t2 = 0.0;
  std::vector<BlockAcceptance> acceptance;
  std::vector<double> median_lambda;  // per individual, time 2
};

struct ReplicateResult {
  int replicate = 0;
  bool ok = false;
  std::string error;
  std::vector<DimensionFit> fits;
  int minimizer_q = 0;

  const DimensionFit* fit_for(int q) const {
    for (const auto& f : fits)
      if (f.q == q) return &f;
    return nullptr;
  }
};

struct DimensionSummary {
  int q = 0;
  double waic_p10 = 0.0, waic_p50 = 0.0, waic_p90 = 0.0;
  double minimizer_frequency = 0.0;
  int minimizer_count = 0;
};

struct StudyReport {
  std::vector<ReplicateResult> replicates;
  std::vector<DimensionSummary> dimensions;
  int successful = 0;
};

/// Summarizes one fit against the scenario's groups.
inline DimensionFit summarize_fit(int q, const PosteriorSamples& samples, const ScenarioData& sd, double threshold,
                                  int ppc_draws, std::uint64_t ppc_seed) {
  DimensionFit f;
  f.q = q;
  f.waic = waic(samples);
  f.acceptance = acceptance_report(samples);
  const auto summaries = lambda_summaries(samples, threshold);
  const auto cls = classify_progress(summaries, threshold, &sd.group_of);
  std::map<std::string, std::vector<double>> med;
  for (const auto& s : summaries) {
    med[sd.group_of[static_cast<std::size_t>(s.individual)]].push_back(s.median);
    if (s.time == 2) f.median_lambda.push_back(s.median);
  }
  for (const auto& g : cls.groups) f.groups.push_back({g.group, sample_mean(med[g.group]), g.negligible, g.total});
  ChainRng rng(ppc_seed);
  const auto ppc = posterior_predictive(sd.data, samples, ppc_draws, rng);
  f.ppc_coverage_t2 = predictive_coverage(ppc, 1);
  return f;
}

/// Per replicate: generate data, fit one chain per dimension, record WAIC,
/// group-wise rate summaries and predictive coverage. Failed replicates are
/// kept with their error message. `progress` is called after each fit.
inline StudyReport run_replications(const StudyConfig& cfg,
                                    const std::function<void(int rep, int q)>& progress = nullptr) {
  cfg.validate();
  StudyReport report;
  for (int rep = 0; rep < cfg.n_reps; ++rep) {
    ReplicateResult rr;
    rr.replicate = rep + 1;
    try {
      GroupScenario sc = cfg.scenario;
      sc.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep), 0x64617461ULL);
      const ScenarioData sd = generate_group_scenario(sc);
      for (int q : cfg.q_list) {
        ChainConfig cc = cfg.chain_for_q(q);
        cc.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(q));
        const PosteriorSamples samples = run_chain(sd.data, cc);
        rr.fits.push_back(summarize_fit(q, samples, sd, cfg.threshold, cfg.ppc_draws, derive_seed(cc.seed, 0x707063ULL)));
        if (progress) progress(rep + 1, q);
      }
      const auto best = std::min_element(rr.fits.begin(), rr.fits.end(), [](const auto& a, const auto& b) {
        return a.waic.waic < b.waic.waic;
      });
      rr.minimizer_q = best->q;
      rr.ok = true;
    } catch (const std::exception& e) {
      rr.ok = false;
      rr.error = e.what();
    }
    report.replicates.push_back(std::move(rr));
  }
  for (const auto& r : report.replicates) report.successful += r.ok ? 1 : 0;
  for (int q : cfg.q_list) {
    DimensionSummary ds;
    ds.q = q;
    std::vector<double> w;
    for (const auto& r : report.replicates) {
      if (!r.ok) continue;
      if (const auto* f = r.fit_for(q)) w.push_back(f->waic.waic);
      ds.minimizer_count += r.minimizer_q == q ? 1 : 0;
    }
    if (!w.empty()) {
      const auto qs = quantiles(w, {0.1, 0.5, 0.9});
      ds.waic_p10 = qs[0];
      ds.waic_p50 = qs[1];
      ds.waic_p90 = qs[2];
    }
    ds.minimizer_frequency = report.successful > 0 ? static_cast<double>(ds.minimizer_count) / report.successful : 0.0;
    report.dimensions.push_back(ds);
  }
  return report;
}

}  // namespace lpm
