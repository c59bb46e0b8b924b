#include "regretcov/problems.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <cmath>
#include <limits>

namespace regretcov {

namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kDualTol = 1e-9;

// Stacked inequality system G z <= h for the polyhedron, including the
// optional nonnegativity rows.
void stack_constraints(const Polyhedron& poly, int n, Eigen::MatrixXd& G, Eigen::VectorXd& h) {
  const int m = static_cast<int>(poly.A.rows());
  const int extra = poly.nonneg ? n : 0;
  G.resize(m + extra, n);
  h.resize(m + extra);
  G.topRows(m) = poly.A;
  h.head(m) = poly.b;
  if (poly.nonneg) {
    G.bottomRows(n) = -Eigen::MatrixXd::Identity(n, n);
    h.tail(n).setZero();
  }
}

Eigen::LLT<Eigen::MatrixXd> factor_or_throw(const Eigen::MatrixXd& H) {
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success)
    throw Singular("qp: Q + lambda I is not positive definite");
  return llt;
}

// Feasible start: the unconstrained minimizer if it already satisfies the
// constraints, else its clip when every row is a simple coordinate bound,
// else a phase-1 LP on the split variables.
Eigen::VectorXd feasible_start(const Eigen::MatrixXd& G, const Eigen::VectorXd& h,
                               const Eigen::VectorXd& z_unc) {
  if (((G * z_unc - h).array() <= kFeasTol).all()) return z_unc;

  const int m = static_cast<int>(G.rows());
  const int n = static_cast<int>(G.cols());
  bool bounds_only = true;
  for (int i = 0; i < m && bounds_only; ++i) {
    int nnz = 0;
    for (int j = 0; j < n; ++j)
      if (G(i, j) != 0.0) ++nnz;
    bounds_only = nnz == 1;
  }
  if (bounds_only) {
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        if (G(i, j) > 0.0) hi(j) = std::min(hi(j), h(i) / G(i, j));
        if (G(i, j) < 0.0) lo(j) = std::max(lo(j), h(i) / G(i, j));
      }
    }
    if ((lo.array() > hi.array() + kFeasTol).any())
      throw Infeasible("qp: empty box");
    return z_unc.cwiseMax(lo).cwiseMin(hi);
  }

  // Phase 1: min sum(s) s.t. G(u - v) - s <= h, u, v, s >= 0.
  Eigen::MatrixXd A(m, 2 * n + m);
  A.leftCols(n) = G;
  A.middleCols(n, n) = -G;
  A.rightCols(m) = -Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(2 * n + m);
  c.tail(m).setOnes();
  SimplexResult s = simplex_solve(A, h, c);
  if (s.objective > 1e-7) throw Infeasible("qp: constraints infeasible");
  return s.x.head(n) - s.x.segment(n, n);
}

}  // namespace

DecisionVector solve_qp_unconstrained(const QpInstance& inst, const Eigen::VectorXd& cost) {
  if (inst.constraints) throw std::invalid_argument("solve_qp_unconstrained: instance has constraints");
  if (cost.size() != inst.dim()) throw std::invalid_argument("solve_qp: cost dimension mismatch");
  const Eigen::MatrixXd H = inst.regularized();
  auto llt = factor_or_throw(H);
  Eigen::VectorXd z = llt.solve(-cost);
  z += llt.solve(-cost - H * z);  // one refinement step
  DecisionVector out;
  out.z = std::move(z);
  out.objective = cost.dot(out.z) + 0.5 * out.z.dot(H * out.z);
  return out;
}

DecisionVector solve_qp_constrained(const QpInstance& inst, const Eigen::VectorXd& cost) {
  if (!inst.constraints) throw std::invalid_argument("solve_qp_constrained: no constraints");
  if (cost.size() != inst.dim()) throw std::invalid_argument("solve_qp: cost dimension mismatch");
  const int n = inst.dim();
  const Eigen::MatrixXd H = inst.regularized();
  auto llt = factor_or_throw(H);

  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  stack_constraints(*inst.constraints, n, G, h);
  const int m = static_cast<int>(G.rows());

  Eigen::VectorXd z = feasible_start(G, h, llt.solve(-cost));
  std::vector<int> active;
  std::vector<char> in_active(static_cast<std::size_t>(m), 0);
  Eigen::VectorXd multipliers = Eigen::VectorXd::Zero(m);

  // Null-space step: the reduced Hessian Z'HZ is positive definite for any
  // working set, so the subproblem stays well-posed even when the active
  // rows are nearly dependent. Multipliers come from a least-squares fit of
  // the gradient on the active normals.
  const long max_iters = 100L * (n + m) + 100;
  for (long iter = 0; iter < max_iters; ++iter) {
    const int k = static_cast<int>(active.size());
    Eigen::VectorXd grad = H * z + cost;

    Eigen::VectorXd p(n);
    Eigen::MatrixXd normals(n, k);
    for (int a = 0; a < k; ++a)
      normals.col(a) = G.row(active[static_cast<std::size_t>(a)]).transpose();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
    int rank = 0;
    if (k == 0) {
      p = llt.solve(-grad);
    } else {
      qr.compute(normals);
      qr.setThreshold(1e-12);
      rank = static_cast<int>(qr.rank());
      if (rank >= n) {
        p = Eigen::VectorXd::Zero(n);
      } else {
        const Eigen::MatrixXd q_full = qr.householderQ();
        const Eigen::MatrixXd null_basis = q_full.rightCols(n - rank);
        const Eigen::MatrixXd reduced = null_basis.transpose() * H * null_basis;
        p = null_basis * reduced.llt().solve(-null_basis.transpose() * grad);
      }
    }

    const double scale = 1.0 + z.cwiseAbs().maxCoeff();
    if (p.cwiseAbs().maxCoeff() <= 1e-11 * scale) {
      Eigen::VectorXd mu =
          k == 0 ? Eigen::VectorXd() : Eigen::VectorXd(qr.solve(Eigen::VectorXd(-grad)));
      int drop = -1;
      for (int i = 0; i < m; ++i) {  // smallest constraint index, deterministic
        for (int a = 0; a < k; ++a) {
          if (active[static_cast<std::size_t>(a)] == i && mu(a) < -kDualTol) {
            drop = a;
            break;
          }
        }
        if (drop >= 0) break;
      }
      if (drop < 0) {
        multipliers.setZero();
        for (int a = 0; a < k; ++a)
          multipliers(active[static_cast<std::size_t>(a)]) = std::max(0.0, mu(a));

        // Exact refit at the final working set removes the drift the
        // iteration accumulated; keep whichever point verifies better.
        if (k > 0 && rank == k) {
          Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
          kkt.topLeftCorner(n, n) = H;
          kkt.topRightCorner(n, k) = normals;
          kkt.bottomLeftCorner(k, n) = normals.transpose();
          Eigen::VectorXd rhs(n + k);
          rhs.head(n) = -cost;
          for (int a = 0; a < k; ++a) rhs(n + a) = h(active[static_cast<std::size_t>(a)]);
          Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
          if (lu.isInvertible()) {
            Eigen::VectorXd sol = lu.solve(rhs);
            sol += lu.solve(rhs - kkt * sol);  // one refinement step
            Eigen::VectorXd z_refit = sol.head(n);
            Eigen::VectorXd m_refit = Eigen::VectorXd::Zero(m);
            for (int a = 0; a < k; ++a)
              m_refit(active[static_cast<std::size_t>(a)]) = std::max(0.0, sol(n + a));
            if (qp_kkt_residuals(inst, cost, z_refit, m_refit).max() <
                qp_kkt_residuals(inst, cost, z, multipliers).max()) {
              z = std::move(z_refit);
              multipliers = std::move(m_refit);
            }
          }
        }

        DecisionVector out;
        out.z = z;
        out.objective = cost.dot(z) + 0.5 * z.dot(H * z);
        KktResiduals r = qp_kkt_residuals(inst, cost, z, multipliers);
        const double kkt_scale =
            std::max(1.0, std::max(z.cwiseAbs().maxCoeff(), (H * z + cost).cwiseAbs().maxCoeff()));
        if (r.max() > 1e-8 * kkt_scale)
          throw std::runtime_error(
              "solve_qp_constrained: KKT residual above tolerance (stationarity " +
              std::to_string(r.stationarity) + ", primal " + std::to_string(r.primal) +
              ", dual " + std::to_string(r.dual) + ", complementarity " +
              std::to_string(r.complementarity) + ", scale " + std::to_string(kkt_scale) + ")");
        return out;
      }
      in_active[static_cast<std::size_t>(active[static_cast<std::size_t>(drop)])] = 0;
      active.erase(active.begin() + drop);
      continue;
    }

    // Ratio test against the inactive constraints; the blocking threshold is
    // scale-relative so rows spanned by the working set never re-enter.
    const double p_norm = p.norm();
    double alpha = 1.0;
    int blocking = -1;
    for (int i = 0; i < m; ++i) {
      if (in_active[static_cast<std::size_t>(i)]) continue;
      const double gp = G.row(i).dot(p);
      if (gp > 1e-10 * G.row(i).norm() * p_norm) {
        const double slack = h(i) - G.row(i).dot(z);
        const double ai = std::max(0.0, slack) / gp;
        if (ai < alpha - 1e-12 || (ai < alpha + 1e-12 && blocking >= 0 && i < blocking)) {
          alpha = std::min(alpha, ai);
          blocking = i;
        }
      }
    }
    z += alpha * p;
    if (blocking >= 0) {
      active.push_back(blocking);
      in_active[static_cast<std::size_t>(blocking)] = 1;
    }
  }
  throw std::runtime_error("solve_qp_constrained: iteration limit exceeded");
}

DecisionVector solve_qp(const QpInstance& inst, const Eigen::VectorXd& cost) {
  return inst.constraints ? solve_qp_constrained(inst, cost) : solve_qp_unconstrained(inst, cost);
}

double KktResiduals::max() const {
  return std::max(std::max(stationarity, primal), std::max(dual, complementarity));
}

KktResiduals qp_kkt_residuals(const QpInstance& inst, const Eigen::VectorXd& cost,
                              const Eigen::VectorXd& z, const Eigen::VectorXd& multipliers) {
  KktResiduals r;
  const Eigen::MatrixXd H = inst.regularized();
  if (!inst.constraints) {
    r.stationarity = (H * z + cost).cwiseAbs().maxCoeff();
    return r;
  }
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  stack_constraints(*inst.constraints, inst.dim(), G, h);
  const Eigen::VectorXd slack = G * z - h;
  r.stationarity = (H * z + cost + G.transpose() * multipliers).cwiseAbs().maxCoeff();
  r.primal = std::max(0.0, slack.maxCoeff());
  r.dual = std::max(0.0, -multipliers.minCoeff());
  r.complementarity = (multipliers.array() * slack.array()).abs().maxCoeff();
  return r;
}

}  // namespace regretcov
