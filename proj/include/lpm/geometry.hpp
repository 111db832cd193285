// Distances, the target point and the position process.
#pragma once

#include <cmath>
#include <algorithm>
#include <span>

#include "lpm/types.hpp"

namespace lpm {

/// arcosh(1 + x) without cancellation for small x.
inline double acosh1p(double x) { return std::log1p(x + std::sqrt(x * (x + 2.0))); }

/// Distance between two admissible points. Throws DomainError for points
/// outside the Poincare disk.
template <class A, class B>
double distance(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y, const MetricSpace& space) {
  const double sep2 = (x - y).squaredNorm();
  if (space.kind == Geometry::Euclidean) return std::sqrt(sep2);

  const double r2 = space.rho * space.rho;
  const double gx = r2 - x.squaredNorm();
  const double gy = r2 - y.squaredNorm();
  if (!(gx > 0.0) || !(gy > 0.0)) throw DomainError("point outside the Poincare disk");
  if (sep2 == 0.0) return 0.0;
  return acosh1p(2.0 * r2 * sep2 / (gx * gy));
}

/// Mean of the item positions.
inline Eigen::RowVectorXd target(const Points& B) {
  if (B.rows() < 1) throw DomainError("target requires at least one item");
  return B.colwise().mean();
}

/// Positions at t = 1..T given the starting point and the T-1 rates.
/// Row t-1 of the result holds time t.
template <class A, class C>
Points propagate_positions(const Eigen::MatrixBase<A>& a1, std::span<const double> lambdas,
                           const Eigen::MatrixBase<C>& target_point) {
  Points out(static_cast<Eigen::Index>(lambdas.size()) + 1, a1.size());
  out.row(0) = a1;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    const double l = lambdas[k];
    if (!(l >= 0.0 && l <= 1.0)) throw DomainError("rate of progress must lie in [0, 1]");
    const auto r = static_cast<Eigen::Index>(k);
    // Exact endpoints: l == 1 lands on the target, l == 0 stays put.
    if (l == 1.0)
      out.row(r + 1) = target_point;
    else if (l == 0.0)
      out.row(r + 1) = out.row(r);
    else
      out.row(r + 1) = (1.0 - l) * out.row(r) + l * target_point;
  }
  return out;
}

/// Rate implied by consecutive distances to the target: 1 - d_curr / d_prev.
inline double rate_from_distances(double d_prev, double d_curr, double tol = 1e-12) {
  if (!(d_prev > 0.0)) throw DomainError("rate undefined: previous distance to the target is zero");
  if (d_curr < 0.0 || d_curr > d_prev * (1.0 + tol))
    throw DomainError("current distance exceeds previous distance (regress is not modeled)");
  return std::clamp(1.0 - d_curr / d_prev, 0.0, 1.0);
}

}  // namespace lpm
