#include "regretcov/prob.hpp"

#include <cmath>

namespace regretcov {

Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& cov) {
  const auto d = cov.rows();
  if (d != cov.cols()) throw std::invalid_argument("cholesky_factor: matrix not square");

  double max_diag = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) max_diag = std::max(max_diag, cov(i, i));
  const double tol = 1e-12 * max_diag;

  Eigen::MatrixXd lower = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double pivot = cov(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= lower(j, k) * lower(j, k);
    if (pivot <= tol) throw NotPositiveDefinite("cholesky_factor: pivot below tolerance");
    lower(j, j) = std::sqrt(pivot);
    for (Eigen::Index i = j + 1; i < d; ++i) {
      double s = cov(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
      lower(i, j) = s / lower(j, j);
    }
  }
  return lower;
}

CovarianceMatrix::CovarianceMatrix(Eigen::MatrixXd m) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw std::invalid_argument("CovarianceMatrix: matrix must be square, dim >= 1");
  const double scale = m.cwiseAbs().maxCoeff();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(scale, 1.0))
    throw std::invalid_argument("CovarianceMatrix: matrix not symmetric");
  matrix_ = 0.5 * (m + m.transpose());
  chol_ = cholesky_factor(matrix_);
}

CostDistribution::CostDistribution(Eigen::VectorXd mean_in, CovarianceMatrix cov_in)
    : mean(std::move(mean_in)), cov(std::move(cov_in)) {
  if (mean.size() != cov.dim())
    throw std::invalid_argument("CostDistribution: mean/cov dimension mismatch");
}

Eigen::MatrixXd sample_costs(const CostDistribution& dist, int n, Seed seed) {
  if (n < 1) throw std::invalid_argument("sample_costs: n must be >= 1");
  const int d = dist.dim();
  Rng rng(seed);
  Eigen::MatrixXd out(n, d);
  Eigen::VectorXd g(d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) g(j) = rng.normal();
    out.row(i) = (dist.mean + dist.cov.cholesky() * g).transpose();
  }
  return out;
}

CovarianceMatrix random_pd_matrix(int dim, Seed seed, double scale) {
  if (dim < 1) throw std::invalid_argument("random_pd_matrix: dim must be >= 1");
  if (scale <= 0.0) throw std::invalid_argument("random_pd_matrix: scale must be positive");
  Rng rng(seed);
  Eigen::MatrixXd g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = rng.normal();
  Eigen::MatrixXd m = scale * (g * g.transpose() / static_cast<double>(dim) +
                               0.1 * Eigen::MatrixXd::Identity(dim, dim));
  return CovarianceMatrix(std::move(m));
}

}  // namespace regretcov
