#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "regretcov/estimators.hpp"
#include "regretcov/prob.hpp"

namespace regretcov {

class NonpositiveModulus : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ZeroMean : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// L * ||mean|| * sqrt(tr(Sigma)); zero for decision maps that are almost
/// surely locally constant (L = 0).
double lipschitz_residual_bound(double lipschitz, const Eigen::VectorXd& mean,
                                const CovarianceMatrix& sigma);

struct TruncatedBound {
  double value = 0.0;
  /// Symbolic order of the dropped remainder; never a number.
  std::string truncation_order;
};

/// Leading term (M/2) * ||mean|| * tr(Sigma); the higher-order remainder is
/// reported as a symbolic order tag.
TruncatedBound smooth_residual_bound(double gradient_bound, const Eigen::VectorXd& mean,
                                     const CovarianceMatrix& sigma);

/// (L^2 / (2 mu)) * tr(Sigma) for a mu-strongly-convex objective.
double strongly_convex_residual_bound(double lipschitz, double strong_convexity,
                                      const CovarianceMatrix& sigma);

/// Leading residual term when the quadratic term equals the cost
/// covariance: -(lambda / (2(1+lambda)^2)) tr(Sigma^2) *
/// (mean' Sigma mean / ||mean||^2).
TruncatedBound markowitz_residual_term(double risk_aversion, const CovarianceMatrix& sigma,
                                       const Eigen::VectorXd& mean);

/// Smallest n with 2 exp(-n eps^2 / (2(B^2 + L^2 sigma_sq))) <= delta,
/// i.e. ceil(2 (B^2 + L^2 sigma_sq) log(2/delta) / eps^2), at least 1.
long concentration_sample_size(double cost_bound, double lipschitz, double sigma_sq,
                               double epsilon, double delta);

/// 2 exp(-n eps^2 / (2 (B^2 + L^2 sigma_sq))).
double tail_probability(long n, double epsilon, double cost_bound, double lipschitz,
                        double sigma_sq);

/**
 * Standard normal quantile. Rational approximation (Acklam's coefficients,
 * relative error below 1.2e-9) refined by one Halley step against erfc,
 * which brings the result to near machine precision.
 */
double normal_quantile(double p);

/// Where the gradient of the decision map at the mean comes from.
struct GradPi {
  enum class Kind { zero, matrix, finite_difference };
  Kind kind = Kind::zero;
  Eigen::MatrixXd value;  // used when kind == matrix

  static GradPi zero() { return {}; }
  static GradPi matrix(Eigen::MatrixXd m);
  /// -(Q + lambda I)^{-1}, the exact gradient of the linear-solve map.
  static GradPi analytic_qp(const Eigen::MatrixXd& Q, double risk_aversion);
  /// Central differences with step 1e-4 (1 + ||cbar||), 2 d extra solves.
  static GradPi finite_difference() { return {Kind::finite_difference, {}}; }
};

struct ConfidenceInterval {
  double center = 0.0;
  double half_width = 0.0;
  double level = 0.0;
  double variance_estimate = 0.0;
  enum class VarianceForm { delta_method, simplified } form = VarianceForm::delta_method;
  long n = 0;
  bool small_sample_warning = false;  // n below 30

  double lo() const { return center - half_width; }
  double hi() const { return center + half_width; }
  std::string to_json() const;
};

/**
 * Asymptotic interval for the covariance estimate. The variance is the
 * sample variance of c_i' z_i - g' c_i with g = pi(cbar) + grad' cbar; when
 * the gradient is zero (or the mean is numerically zero) this reduces to
 * the simplified three-term variance and is tagged as such.
 */
ConfidenceInterval clt_confidence_interval(const SamplePairs& pairs, const Problem& problem,
                                           const GradPi& grad_pi, double level);

/// {bound_type, value, inputs, truncation_order?}
std::string bound_report_json(const std::string& bound_type, double value,
                              const std::vector<std::pair<std::string, double>>& inputs,
                              const std::optional<std::string>& truncation_order);

}  // namespace regretcov
