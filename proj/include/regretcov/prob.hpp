#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace regretcov {

/// 64-bit seed; equal seeds produce bit-identical sample streams.
using Seed = std::uint64_t;

class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Deterministic random stream with a fully specified algorithm so that
 * replications are portable across platforms and standard libraries.
 *
 * Bits come from std::mt19937_64 (the engine's behaviour is pinned by the
 * standard). All variate transforms are implemented here rather than via
 * std::*_distribution, whose algorithms are implementation-defined:
 *   - uniform01: top 53 bits mapped to [0, 1)
 *   - normal:    Box-Muller on (u1, u2], values consumed in pairs
 */
class Rng {
 public:
  explicit Rng(Seed seed) : engine_(seed) {}

  /// Stream for a parallel task: seed xor task index.
  static Rng for_task(Seed seed, std::uint64_t task_index) {
    return Rng(seed ^ task_index);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller; generates two values per transform.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] keeps the log finite.
    double u1 = 1.0 - uniform01();
    double u2 = uniform01();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform01() * static_cast<double>(n)) % n;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/**
 * Lower-triangular Cholesky factor L with L L^T = cov.
 *
 * Throws NotPositiveDefinite when a pivot falls at or below
 * 1e-12 * max diagonal entry; the input must be symmetric.
 */
Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& cov);

/**
 * Symmetric positive definite matrix, validated at construction.
 *
 * Symmetry is required to within 1e-12 relative; positive definiteness is
 * established by a successful Cholesky factorization, which is cached.
 */
class CovarianceMatrix {
 public:
  explicit CovarianceMatrix(Eigen::MatrixXd m);

  int dim() const { return static_cast<int>(matrix_.rows()); }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  /// Cached lower-triangular factor.
  const Eigen::MatrixXd& cholesky() const { return chol_; }
  double trace() const { return matrix_.trace(); }

 private:
  Eigen::MatrixXd matrix_;
  Eigen::MatrixXd chol_;
};

/// Gaussian law of the uncertain cost vector: mean plus covariance with a
/// cached factor for sampling.
struct CostDistribution {
  Eigen::VectorXd mean;
  CovarianceMatrix cov;

  CostDistribution(Eigen::VectorXd mean_in, CovarianceMatrix cov_in);
  int dim() const { return static_cast<int>(mean.size()); }
};

/**
 * n i.i.d. draws, one per row: mu + L g with g standard normal.
 *
 * Each row consumes dim normals in column order, so the stream is a pure
 * function of (dist, n, seed).
 */
Eigen::MatrixXd sample_costs(const CostDistribution& dist, int n, Seed seed);

/**
 * Random positive definite matrix scale * (G G^T / d + 0.1 I) with G a
 * d x d standard normal matrix. The 0.1 I floor keeps the minimum
 * eigenvalue at or above 0.1 * scale.
 */
CovarianceMatrix random_pd_matrix(int dim, Seed seed, double scale = 1.0);

}  // namespace regretcov
