#include "regretcov/bounds.hpp"

#include <json.hpp>

#include <Eigen/Cholesky>
#include <cmath>

namespace regretcov {

double lipschitz_residual_bound(double lipschitz, const Eigen::VectorXd& mean,
                                const CovarianceMatrix& sigma) {
  if (lipschitz < 0.0) throw std::invalid_argument("lipschitz_residual_bound: L must be >= 0");
  return lipschitz * mean.norm() * std::sqrt(sigma.trace());
}

TruncatedBound smooth_residual_bound(double gradient_bound, const Eigen::VectorXd& mean,
                                     const CovarianceMatrix& sigma) {
  if (gradient_bound < 0.0) throw std::invalid_argument("smooth_residual_bound: M must be >= 0");
  return {0.5 * gradient_bound * mean.norm() * sigma.trace(), "O(||Sigma||_F^{3/2})"};
}

double strongly_convex_residual_bound(double lipschitz, double strong_convexity,
                                      const CovarianceMatrix& sigma) {
  if (strong_convexity <= 0.0)
    throw NonpositiveModulus("strongly_convex_residual_bound: modulus must be positive");
  if (lipschitz < 0.0)
    throw std::invalid_argument("strongly_convex_residual_bound: L must be >= 0");
  return lipschitz * lipschitz / (2.0 * strong_convexity) * sigma.trace();
}

TruncatedBound markowitz_residual_term(double risk_aversion, const CovarianceMatrix& sigma,
                                       const Eigen::VectorXd& mean) {
  if (risk_aversion < 0.0)
    throw std::invalid_argument("markowitz_residual_term: lambda must be >= 0");
  const double mean_sq = mean.squaredNorm();
  if (mean_sq == 0.0) throw ZeroMean("markowitz_residual_term: mean must be nonzero");
  const double lam = risk_aversion;
  const double trace_sq = sigma.matrix().squaredNorm();  // tr(Sigma^2), Sigma symmetric
  const double rayleigh = mean.dot(sigma.matrix() * mean) / mean_sq;
  return {-lam / (2.0 * (1.0 + lam) * (1.0 + lam)) * trace_sq * rayleigh, "O(||Sigma||^3)"};
}

long concentration_sample_size(double cost_bound, double lipschitz, double sigma_sq,
                               double epsilon, double delta) {
  if (epsilon <= 0.0) throw std::invalid_argument("concentration_sample_size: epsilon > 0 required");
  if (delta <= 0.0 || delta >= 2.0)
    throw std::invalid_argument("concentration_sample_size: delta in (0, 2) required");
  const double denom = cost_bound * cost_bound + lipschitz * lipschitz * sigma_sq;
  const double raw = 2.0 * denom * std::log(2.0 / delta) / (epsilon * epsilon);
  return std::max(1L, static_cast<long>(std::ceil(raw)));
}

double tail_probability(long n, double epsilon, double cost_bound, double lipschitz,
                        double sigma_sq) {
  const double denom = cost_bound * cost_bound + lipschitz * lipschitz * sigma_sq;
  if (denom <= 0.0) return 0.0;
  return 2.0 * std::exp(-static_cast<double>(n) * epsilon * epsilon / (2.0 * denom));
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p in (0,1) required");

  // Acklam's rational approximation in three regions.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1.0 - plow;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= phigh) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley step against the exact CDF via erfc.
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  x -= u / (1.0 + x * u / 2.0);
  return x;
}

GradPi GradPi::matrix(Eigen::MatrixXd m) {
  GradPi g;
  g.kind = Kind::matrix;
  g.value = std::move(m);
  return g;
}

GradPi GradPi::analytic_qp(const Eigen::MatrixXd& Q, double risk_aversion) {
  const Eigen::MatrixXd H =
      Q + risk_aversion * Eigen::MatrixXd::Identity(Q.rows(), Q.cols());
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) throw Singular("GradPi::analytic_qp: singular system");
  return matrix(-llt.solve(Eigen::MatrixXd::Identity(Q.rows(), Q.cols())));
}

std::string ConfidenceInterval::to_json() const {
  nlohmann::json j;
  j["center"] = center;
  j["half_width"] = half_width;
  j["level"] = level;
  j["variance"] = variance_estimate;
  j["variance_form"] = form == VarianceForm::delta_method ? "delta" : "simplified";
  j["n"] = n;
  if (small_sample_warning) j["small_sample_warning"] = true;
  return j.dump();
}

ConfidenceInterval clt_confidence_interval(const SamplePairs& pairs, const Problem& problem,
                                           const GradPi& grad_pi, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("clt_confidence_interval: level in (0,1) required");
  const long n = pairs.size();
  if (n < 2) throw InsufficientSamples("clt_confidence_interval: need n >= 2");
  const int d = pairs.dim();

  const Eigen::VectorXd cbar = pairs.costs.colwise().mean().transpose();
  const Eigen::VectorXd pi_at_mean = problem.solve(cbar).z;

  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(d, d);
  switch (grad_pi.kind) {
    case GradPi::Kind::zero:
      break;
    case GradPi::Kind::matrix:
      if (grad_pi.value.rows() != d || grad_pi.value.cols() != d)
        throw std::invalid_argument("clt_confidence_interval: gradient shape mismatch");
      grad = grad_pi.value;
      break;
    case GradPi::Kind::finite_difference: {
      const double step = 1e-4 * (1.0 + cbar.norm());
      for (int j = 0; j < d; ++j) {
        Eigen::VectorXd hi = cbar, lo = cbar;
        hi(j) += step;
        lo(j) -= step;
        grad.col(j) = (problem.solve(hi).z - problem.solve(lo).z) / (2.0 * step);
      }
      break;
    }
  }

  const Eigen::VectorXd g = pi_at_mean + grad.transpose() * cbar;
  double sum = 0.0, sum_sq = 0.0;
  for (long i = 0; i < n; ++i) {
    const Eigen::VectorXd c = pairs.costs.row(i).transpose();
    const double t = c.dot(pairs.decisions.row(i).transpose()) - g.dot(c);
    sum += t;
    sum_sq += t * t;
  }
  const double variance =
      std::max(0.0, (sum_sq - sum * sum / static_cast<double>(n)) / static_cast<double>(n - 1));

  ConfidenceInterval ci;
  ci.center = cov_regret(pairs).value;
  ci.level = level;
  ci.variance_estimate = variance;
  ci.n = n;
  ci.small_sample_warning = n < 30;
  const bool zero_grad = grad_pi.kind == GradPi::Kind::zero;
  const bool zero_mean = cbar.norm() <= 1e-12;
  ci.form = (zero_grad || zero_mean) ? ConfidenceInterval::VarianceForm::simplified
                                     : ConfidenceInterval::VarianceForm::delta_method;
  const double z = normal_quantile(0.5 + level / 2.0);
  ci.half_width = z * std::sqrt(variance / static_cast<double>(n));
  return ci;
}

std::string bound_report_json(const std::string& bound_type, double value,
                              const std::vector<std::pair<std::string, double>>& inputs,
                              const std::optional<std::string>& truncation_order) {
  nlohmann::json j;
  j["bound_type"] = bound_type;
  j["value"] = value;
  nlohmann::json in;
  for (const auto& [k, v] : inputs) in[k] = v;
  j["inputs"] = in;
  if (truncation_order) j["truncation_order"] = *truncation_order;
  return j.dump();
}

}  // namespace regretcov
