// Core domain types for the latent process model.
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lpm {

/// Points stored one per row; columns are latent coordinates.
using Points = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Invalid user input (malformed files, bad configuration).
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Numerical breakdown at run time (non-finite likelihood, degenerate matrices).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Geometry { Euclidean, PoincareDisk };

inline std::string to_string(Geometry g) {
  return g == Geometry::Euclidean ? "euclidean" : "poincare";
}

inline Geometry geometry_from_string(const std::string& s) {
  if (s == "euclidean") return Geometry::Euclidean;
  if (s == "poincare" || s == "poincare-disk" || s == "hyperbolic") return Geometry::PoincareDisk;
  throw ValidationError("unknown metric '" + s + "' (expected euclidean or poincare)");
}

struct MetricSpace {
  Geometry kind = Geometry::Euclidean;
  int q = 2;
  double rho = 1.0;

  static MetricSpace euclidean(int q) { return {Geometry::Euclidean, q, 1.0}; }
  static MetricSpace poincare(double rho) { return {Geometry::PoincareDisk, 2, rho}; }

  void validate() const {
    if (q < 1) throw ValidationError("latent dimension must be at least 1");
    if (kind == Geometry::PoincareDisk) {
      if (q != 2) throw ValidationError("the Poincare disk is only supported with dimension 2");
      if (!(rho > 0.0)) throw ValidationError("disk radius must be positive");
    }
  }

  template <class Derived>
  bool admissible(const Eigen::MatrixBase<Derived>& x) const {
    if (!x.allFinite()) return false;
    if (kind == Geometry::Euclidean) return true;
    return x.squaredNorm() < rho * rho;
  }

  bool operator==(const MetricSpace&) const = default;
};

/// Binary responses Y(i, j, t) with an observation mask. Cells of one
/// individual at one time point are contiguous over items.
class ResponseTensor {
 public:
  ResponseTensor() = default;
  ResponseTensor(int n, int p, int T)
      : n_(n), p_(p), T_(T),
        values_(static_cast<std::size_t>(n) * p * T, 0),
        observed_(static_cast<std::size_t>(n) * p * T, 0) {
    if (n < 1 || p < 1 || T < 1) throw ValidationError("tensor dimensions must be positive");
  }

  int n() const { return n_; }
  int p() const { return p_; }
  int T() const { return T_; }
  std::size_t size() const { return values_.size(); }

  /// Time index t is zero based here (t = 0 is the first time point).
  std::size_t index(int i, int j, int t) const {
    return (static_cast<std::size_t>(i) * T_ + t) * p_ + j;
  }

  int value(int i, int j, int t) const { return values_[index(i, j, t)]; }
  bool observed(int i, int j, int t) const { return observed_[index(i, j, t)] != 0; }

  void set(int i, int j, int t, int y) {
    if (y != 0 && y != 1) throw ValidationError("responses must be 0 or 1");
    values_[index(i, j, t)] = static_cast<std::uint8_t>(y);
    observed_[index(i, j, t)] = 1;
  }
  void set_missing(int i, int j, int t) {
    values_[index(i, j, t)] = 0;
    observed_[index(i, j, t)] = 0;
  }

  std::size_t observed_count() const {
    std::size_t c = 0;
    for (auto o : observed_) c += o;
    return c;
  }

  /// Throws unless every individual has an observed response at every time
  /// point and T >= 2. Engines accept tensors that fail this check (prior
  /// recovery runs use an empty mask); loaders do not.
  void validate_for_fit() const {
    if (T_ < 2) throw ValidationError("at least two time points are required");
    for (int i = 0; i < n_; ++i)
      for (int t = 0; t < T_; ++t) {
        bool any = false;
        for (int j = 0; j < p_ && !any; ++j) any = observed(i, j, t);
        if (!any)
          throw ValidationError("individual " + std::to_string(i + 1) + " has no observed response at time " +
                                std::to_string(t + 1));
      }
  }

  bool operator==(const ResponseTensor&) const = default;

 private:
  int n_ = 0, p_ = 0, T_ = 0;
  std::vector<std::uint8_t> values_;
  std::vector<std::uint8_t> observed_;
};

/// Stored latent quantities. Positions at t >= 2 are derived, never stored.
/// Rate arrays are n x (T-1); column k holds time point k + 2.
struct LatentState {
  Points a1;  // n x q
  Points B;   // p x q
  Matrix lambda;
  IntMatrix r;
  Matrix pi;
};

struct ModelParams {
  Vector alpha;
  Vector beta;
  double gamma = 1.0;
  double sigma_alpha2 = 1.0;

  void validate() const {
    if (!(gamma >= 0.0)) throw DomainError("gamma must be non-negative");
    if (!(sigma_alpha2 > 0.0)) throw DomainError("sigma_alpha2 must be positive");
  }
};

/// Prior hyperparameters. Defaults are the simulation-study values.
struct Hyperparams {
  double sigma_beta = 5.0;
  double sigma_gamma = 2.0;
  double sigma_a = 1.0;
  double sigma_b = 1.0;
  double a_sigma_alpha = 1.0;
  double b_sigma_alpha = 1.0;
  double mu0 = -2.0;
  double sigma0 = 1.0;
  double mu1 = 0.0;
  double sigma1 = 2.0;
  double a_pi = 1.0;
  double b_pi = 1.0;

  void validate() const {
    for (double v : {sigma_beta, sigma_gamma, sigma_a, sigma_b, a_sigma_alpha, b_sigma_alpha, sigma0, sigma1,
                     a_pi, b_pi})
      if (!(v > 0.0)) throw ValidationError("prior scale and shape parameters must be positive");
    if (!std::isfinite(mu0) || !std::isfinite(mu1)) throw ValidationError("mixture means must be finite");
  }
};

}  // namespace lpm
