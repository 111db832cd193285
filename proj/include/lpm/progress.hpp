// Posterior summaries of the rates of progress, progress classification,
// and Procrustes-aligned interaction-map export.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lpm/alignment.hpp"
#include "lpm/geometry.hpp"
#include "lpm/mcmc.hpp"
#include "lpm/stats.hpp"
#include "lpm/types.hpp"

namespace lpm {

/// Posterior summary of one rate lambda_{i,t}. `time` is the one-based time
/// point (>= 2); `individual` is zero based.
struct ProgressSummary {
  int individual = 0;
  int time = 2;
  double median = 0.0;
  double p10 = 0.0, p90 = 0.0;
  double p025 = 0.0, p975 = 0.0;
  double prob_progress = 0.0;
  bool progress = false;
};

/// Summary of the retained chain of lambda at individual i, rate column k
/// (time point k + 2).
inline ProgressSummary lambda_summary(const PosteriorSamples& samples, int i, int k, double threshold = 0.5) {
  if (samples.draws.empty()) throw ValidationError("no retained samples");
  if (i < 0 || i >= samples.n || k < 0 || k >= samples.T - 1) throw std::out_of_range("lambda_summary index");
  std::vector<double> lam;
  lam.reserve(samples.draws.size());
  std::size_t ones = 0;
  for (const auto& d : samples.draws) {
    lam.push_back(d.state.lambda(i, k));
    ones += d.state.r(i, k) == 1 ? 1 : 0;
  }
  const auto q = quantiles(std::move(lam), {0.5, 0.1, 0.9, 0.025, 0.975});
  ProgressSummary s;
  s.individual = i;
  s.time = k + 2;
  s.median = q[0];
  s.p10 = q[1];
  s.p90 = q[2];
  s.p025 = q[3];
  s.p975 = q[4];
  s.prob_progress = static_cast<double>(ones) / static_cast<double>(samples.draws.size());
  s.progress = s.prob_progress >= threshold;
  return s;
}

/// Summaries for every individual and rate column.
inline std::vector<ProgressSummary> lambda_summaries(const PosteriorSamples& samples, double threshold = 0.5) {
  std::vector<ProgressSummary> out;
  for (int i = 0; i < samples.n; ++i)
    for (int k = 0; k < samples.T - 1; ++k) out.push_back(lambda_summary(samples, i, k, threshold));
  return out;
}

struct GroupProgressCount {
  std::string group;
  int total = 0;
  int progress = 0;
  int negligible = 0;

  double negligible_share() const { return total > 0 ? static_cast<double>(negligible) / total : 0.0; }
};

struct Classification {
  std::vector<bool> progress;  // parallel to the input summaries
  std::vector<GroupProgressCount> groups;
};

/// Marks a summary as progress when prob_progress >= threshold. When
/// `group_of` is given (indexed by individual) counts are also reported per
/// group, in order of first appearance.
inline Classification classify_progress(const std::vector<ProgressSummary>& summaries, double threshold = 0.5,
                                        const std::vector<std::string>* group_of = nullptr) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ValidationError("threshold must lie in [0, 1]");
  Classification c;
  std::map<std::string, std::size_t> slot;
  for (const auto& s : summaries) {
    const bool prog = s.prob_progress >= threshold;
    c.progress.push_back(prog);
    if (!group_of) continue;
    if (s.individual < 0 || s.individual >= static_cast<int>(group_of->size()))
      throw ValidationError("group labels do not cover every individual");
    const auto& g = (*group_of)[static_cast<std::size_t>(s.individual)];
    auto it = slot.find(g);
    if (it == slot.end()) {
      it = slot.emplace(g, c.groups.size()).first;
      c.groups.push_back({g});
    }
    auto& cnt = c.groups[it->second];
    ++cnt.total;
    (prog ? cnt.progress : cnt.negligible) += 1;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Interaction map

enum class MapEntity { Individual, Item, Target };

inline std::string to_string(MapEntity e) {
  switch (e) {
    case MapEntity::Individual: return "individual";
    case MapEntity::Item: return "item";
    case MapEntity::Target: return "target";
  }
  return "?";
}

struct MapRow {
  MapEntity entity = MapEntity::Individual;
  int index = 0;  // zero based individual or item index
  int time = 0;   // one-based time point for individuals, 0 otherwise
  std::string label;
};

struct InteractionMap {
  std::vector<MapRow> rows;
  Points coords;  // median aligned coordinates, one row per entry in rows
  int reference_draw = 0;
};

/// Every point of one draw: individuals at each time, items, then the target.
inline Configuration draw_configuration(const Draw& d, int T) {
  const auto n = d.state.a1.rows(), p = d.state.B.rows(), q = d.state.B.cols();
  Configuration cfg;
  cfg.points = Points(n * T + p + 1, q);
  const Eigen::RowVectorXd tgt = target(d.state.B);
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Points pos = individual_positions(d.state, static_cast<int>(i), tgt);
    for (int t = 0; t < T; ++t) {
      cfg.labels.push_back("a:" + std::to_string(i + 1) + ":" + std::to_string(t + 1));
      cfg.points.row(row++) = pos.row(t);
    }
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    cfg.labels.push_back("b:" + std::to_string(j + 1));
    cfg.points.row(row++) = d.state.B.row(j);
  }
  cfg.labels.push_back("target");
  cfg.points.row(row) = tgt;
  return cfg;
}

/// Expresses a configuration in its principal-axis frame: centered (when
/// translation is allowed), rotated onto the axes of its second moment,
/// and each axis oriented so that the third moment along it is positive.
/// The result depends on the input only up to rigid motion.
inline Points canonical_frame(const Points& x, bool translate) {
  Eigen::RowVectorXd center = Eigen::RowVectorXd::Zero(x.cols());
  if (translate) center = x.colwise().mean();
  const Matrix c = x.rowwise() - center;
  Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeThinV);
  Matrix v = svd.matrixV();
  Points out = c * v;
  for (Eigen::Index k = 0; k < out.cols(); ++k) {
    const double m3 = out.col(k).array().cube().sum();
    if (m3 < 0.0) out.col(k) *= -1.0;
  }
  return out;
}

/// Coordinate-wise posterior medians of Procrustes-aligned configurations.
/// The reference is the retained draw with the highest log posterior,
/// placed in its canonical frame.
inline InteractionMap export_interaction_map(const PosteriorSamples& samples) {
  if (samples.draws.empty()) throw ValidationError("no retained samples");
  if (samples.space().q > 3) throw ValidationError("interaction maps are only exported for dimension 3 or less");
  const bool translate = samples.space().kind == Geometry::Euclidean;
  InteractionMap map;
  std::size_t ref = 0;
  for (std::size_t s = 1; s < samples.draws.size(); ++s)
    if (samples.draws[s].log_posterior > samples.draws[ref].log_posterior) ref = s;
  map.reference_draw = static_cast<int>(ref);

  const Configuration ref_cfg = draw_configuration(samples.draws[ref], samples.T);
  const Points reference = canonical_frame(ref_cfg.points, translate);
  const auto rows = reference.rows(), q = reference.cols();
  std::vector<Points> aligned;
  aligned.reserve(samples.draws.size());
  for (const auto& d : samples.draws) {
    const Points x = draw_configuration(d, samples.T).points;
    aligned.push_back(procrustes_transform(x, reference, translate).apply(x));
  }
  map.coords = Points(rows, q);
  std::vector<double> buf(aligned.size());
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < q; ++c) {
      for (std::size_t s = 0; s < aligned.size(); ++s) buf[s] = aligned[s](r, c);
      map.coords(r, c) = quantile(buf, 0.5);
    }
  for (int i = 0; i < samples.n; ++i)
    for (int t = 0; t < samples.T; ++t)
      map.rows.push_back({MapEntity::Individual, i, t + 1, ref_cfg.labels[static_cast<std::size_t>(i * samples.T + t)]});
  for (int j = 0; j < samples.p; ++j)
    map.rows.push_back({MapEntity::Item, j, 0, "b:" + std::to_string(j + 1)});
  map.rows.push_back({MapEntity::Target, 0, 0, "target"});
  return map;
}

// ---------------------------------------------------------------------------
// Kernel densities of the rates

struct DensityCurve {
  int individual = 0;
  int time = 2;
  double bandwidth = 0.0;
  std::vector<double> grid;
  std::vector<double> density;
};

inline constexpr int kDensityGridPoints = 512;

/// Gaussian kernel density of a sample of rates on a 512-point grid over
/// [0, 1], renormalized to unit trapezoid mass on the interval. The
/// bandwidth follows Silverman's rule, floored at the grid spacing.
inline DensityCurve kernel_density_unit(const std::vector<double>& x) {
  if (x.empty()) throw ValidationError("density of an empty sample");
  const int m = kDensityGridPoints;
  const double step = 1.0 / (m - 1);
  double h = 0.0;
  if (x.size() > 1) {
    const double sd = std::sqrt(sample_variance(x));
    const auto q = quantiles(x, {0.25, 0.75});
    const double iqr = (q[1] - q[0]) / 1.34;
    const double spread = iqr > 0.0 ? std::min(sd, iqr) : sd;
    h = 0.9 * spread * std::pow(static_cast<double>(x.size()), -0.2);
  }
  h = std::max(h, step);
  DensityCurve c;
  c.bandwidth = h;
  c.grid.resize(m);
  c.density.assign(m, 0.0);
  for (int g = 0; g < m; ++g) {
    const double u = g * step;
    c.grid[g] = u;
    double acc = 0.0;
    for (double v : x) {
      const double z = (u - v) / h;
      acc += std::exp(-0.5 * z * z);
    }
    c.density[g] = acc;
  }
  double mass = 0.0;
  for (int g = 1; g < m; ++g) mass += 0.5 * step * (c.density[g - 1] + c.density[g]);
  if (!(mass > 0.0)) throw NumericalError("kernel density has no mass on [0, 1]");
  for (auto& v : c.density) v /= mass;
  return c;
}

/// Trapezoid integral of a density curve over its grid.
inline double density_mass(const DensityCurve& c) {
  double mass = 0.0;
  for (std::size_t g = 1; g < c.grid.size(); ++g)
    mass += 0.5 * (c.grid[g] - c.grid[g - 1]) * (c.density[g - 1] + c.density[g]);
  return mass;
}

/// Density curves of every rate column for the requested individuals
/// (zero-based ids).
inline std::vector<DensityCurve> lambda_density_export(const PosteriorSamples& samples, const std::vector<int>& ids) {
  if (samples.draws.empty()) throw ValidationError("no retained samples");
  std::vector<DensityCurve> out;
  for (int i : ids) {
    if (i < 0 || i >= samples.n) throw ValidationError("individual id " + std::to_string(i + 1) + " out of range");
    for (int k = 0; k < samples.T - 1; ++k) {
      std::vector<double> lam;
      lam.reserve(samples.draws.size());
      for (const auto& d : samples.draws) lam.push_back(d.state.lambda(i, k));
      auto c = kernel_density_unit(lam);
      c.individual = i;
      c.time = k + 2;
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace lpm
