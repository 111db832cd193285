// Identifiability handling: the item scale constraint and Procrustes matching.
#pragma once

#include <cmath>
#include <string>
#include <unordered_set>
#include <vector>

#include <Eigen/SVD>

#include "lpm/types.hpp"

namespace lpm {

/// Rescales items and starting positions so that sqrt(mean ||b_j||^2) = 1,
/// compensating in gamma so that every linear predictor is unchanged.
/// Returns the factor c that was divided out. A no-op (returns 1) on the
/// Poincare disk, where the radius fixes the scale.
inline double enforce_scale(LatentState& s, ModelParams& params, const MetricSpace& space) {
  if (space.kind == Geometry::PoincareDisk) return 1.0;
  if (s.B.rows() < 1) throw DomainError("scale constraint needs at least one item");
  const double c = std::sqrt(s.B.squaredNorm() / static_cast<double>(s.B.rows()));
  if (!(c > 0.0) || !std::isfinite(c)) throw NumericalError("degenerate item configuration: all items at the origin");
  if (c == 1.0) return 1.0;
  s.B /= c;
  s.a1 /= c;
  params.gamma *= c;
  return c;
}

/// Labeled point set used for alignment and map export.
struct Configuration {
  std::vector<std::string> labels;
  Points points;

  void validate() const {
    if (static_cast<Eigen::Index>(labels.size()) != points.rows())
      throw ValidationError("configuration labels and points disagree in count");
    std::unordered_set<std::string> seen(labels.begin(), labels.end());
    if (seen.size() != labels.size()) throw ValidationError("configuration labels must be unique");
  }
};

/// Rigid transform x -> x * rotation + shift (rows are points).
struct RigidTransform {
  Matrix rotation;
  Eigen::RowVectorXd shift;

  Points apply(const Points& x) const {
    Points out = x * rotation;
    out.rowwise() += shift;
    return out;
  }
};

/// Orthogonal Procrustes without scaling: the rotation/reflection (plus a
/// translation when `translate` is set) minimizing the summed squared
/// distance from the transformed sample to the reference.
inline RigidTransform procrustes_transform(const Points& sample, const Points& reference, bool translate = true) {
  if (sample.rows() != reference.rows() || sample.cols() != reference.cols())
    throw ValidationError("procrustes: sample and reference differ in shape");
  const auto q = sample.cols();
  Eigen::RowVectorXd ms = Eigen::RowVectorXd::Zero(q), mr = Eigen::RowVectorXd::Zero(q);
  if (translate) {
    ms = sample.colwise().mean();
    mr = reference.colwise().mean();
  }
  const Matrix xs = sample.rowwise() - ms;
  const Matrix xr = reference.rowwise() - mr;
  Eigen::JacobiSVD<Matrix> svd(xs.transpose() * xr, Eigen::ComputeFullU | Eigen::ComputeFullV);
  RigidTransform tr;
  tr.rotation = svd.matrixU() * svd.matrixV().transpose();
  tr.shift = mr - ms * tr.rotation;
  return tr;
}

/// Aligns `sample` to `reference` by a rigid motion. Labels must match.
/// Euclidean geometry allows translation; the Poincare disk only rotations
/// and reflections about the origin.
inline Configuration procrustes_align(const Configuration& sample, const Configuration& reference,
                                      Geometry geometry = Geometry::Euclidean) {
  sample.validate();
  reference.validate();
  if (sample.points.cols() != reference.points.cols())
    throw ValidationError("procrustes: dimension mismatch");
  if (sample.labels != reference.labels) throw ValidationError("procrustes: labels differ");
  const auto tr = procrustes_transform(sample.points, reference.points, geometry == Geometry::Euclidean);
  return {sample.labels, tr.apply(sample.points)};
}

}  // namespace lpm
