#pragma once

// Brute-force reference implementations used only by tests. These stay
// independent of the solver code paths they check.

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <vector>

#include "regretcov/problems.hpp"

namespace test_oracles {

// Every vertex of {A z <= b, z >= 0 if nonneg}: solve all n-subsets of the
// stacked constraint rows as equalities and keep feasible solutions.
inline std::vector<Eigen::VectorXd> enumerate_vertices(const Eigen::MatrixXd& A,
                                                       const Eigen::VectorXd& b, bool nonneg) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  Eigen::MatrixXd G(m + (nonneg ? n : 0), n);
  Eigen::VectorXd h(G.rows());
  G.topRows(m) = A;
  h.head(m) = b;
  if (nonneg) {
    G.bottomRows(n) = -Eigen::MatrixXd::Identity(n, n);
    h.tail(n).setZero();
  }
  const int rows = static_cast<int>(G.rows());

  std::vector<Eigen::VectorXd> vertices;
  std::vector<int> pick(static_cast<std::size_t>(n));
  auto recurse = [&](auto&& self, int start, int depth) -> void {
    if (depth == n) {
      Eigen::MatrixXd M(n, n);
      Eigen::VectorXd rhs(n);
      for (int i = 0; i < n; ++i) {
        M.row(i) = G.row(pick[static_cast<std::size_t>(i)]);
        rhs(i) = h(pick[static_cast<std::size_t>(i)]);
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
      if (!lu.isInvertible()) return;
      Eigen::VectorXd z = lu.solve(rhs);
      if (((G * z - h).array() <= 1e-7).all()) vertices.push_back(std::move(z));
      return;
    }
    for (int i = start; i < rows; ++i) {
      pick[static_cast<std::size_t>(depth)] = i;
      self(self, i + 1, depth + 1);
    }
  };
  recurse(recurse, 0, 0);
  return vertices;
}

inline double min_over_vertices(const std::vector<Eigen::VectorXd>& vertices,
                                const Eigen::VectorXd& cost) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& v : vertices) best = std::min(best, cost.dot(v));
  return best;
}

// Exhaustive subset scan for the 0/1 knapsack (maximization).
inline double knapsack_brute_force(const Eigen::VectorXd& values, const Eigen::VectorXd& weights,
                                   double capacity) {
  const int d = static_cast<int>(values.size());
  double best = -std::numeric_limits<double>::infinity();
  for (long mask = 0; mask < (1L << d); ++mask) {
    double value = 0.0, weight = 0.0;
    for (int j = 0; j < d; ++j) {
      if (mask & (1L << j)) {
        value += values(j);
        weight += weights(j);
      }
    }
    if (weight <= capacity) best = std::max(best, value);
  }
  return best;
}

// Exhaustive reference for min c'z + 0.5 z'Hz over {G z <= h}: try every
// constraint subset as the active set and keep KKT-consistent solutions.
// Exponential in the row count; small instances only.
inline double qp_active_subset_oracle(const Eigen::MatrixXd& H, const Eigen::VectorXd& c,
                                      const Eigen::MatrixXd& G, const Eigen::VectorXd& h) {
  const int m = static_cast<int>(G.rows());
  const int n = static_cast<int>(G.cols());
  double best = std::numeric_limits<double>::infinity();
  for (long mask = 0; mask < (1L << m); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < m; ++i)
      if (mask & (1L << i)) act.push_back(i);
    const int k = static_cast<int>(act.size());
    if (k > n) continue;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
    kkt.topLeftCorner(n, n) = H;
    for (int a = 0; a < k; ++a) {
      kkt.block(n + a, 0, 1, n) = G.row(act[static_cast<std::size_t>(a)]);
      kkt.block(0, n + a, n, 1) = G.row(act[static_cast<std::size_t>(a)]).transpose();
    }
    Eigen::VectorXd rhs(n + k);
    rhs.head(n) = -c;
    for (int a = 0; a < k; ++a) rhs(n + a) = h(act[static_cast<std::size_t>(a)]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) continue;
    Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd z = sol.head(n);
    const Eigen::VectorXd mu = sol.tail(k);
    if (((G * z - h).array() > 1e-8).any()) continue;
    if (k > 0 && (mu.array() < -1e-8).any()) continue;
    best = std::min(best, c.dot(z) + 0.5 * z.dot(H * z));
  }
  return best;
}

// Shortest source-to-sink path on the acyclic grid by dynamic programming
// over topologically ordered nodes.
inline double grid_shortest_path(const regretcov::GridFlowInstance& grid,
                                 const Eigen::VectorXd& edge_costs) {
  const int n = grid.num_nodes();
  std::vector<double> dist(static_cast<std::size_t>(n),
                           std::numeric_limits<double>::infinity());
  dist[static_cast<std::size_t>(grid.source)] = 0.0;
  // Edges go rightward/downward, so increasing node id is a topological order.
  for (int node = 0; node < n; ++node) {
    if (!std::isfinite(dist[static_cast<std::size_t>(node)])) continue;
    for (int e = 0; e < grid.num_edges(); ++e) {
      const auto& [from, to] = grid.edges[static_cast<std::size_t>(e)];
      if (from == node)
        dist[static_cast<std::size_t>(to)] =
            std::min(dist[static_cast<std::size_t>(to)],
                     dist[static_cast<std::size_t>(from)] + edge_costs(e));
    }
  }
  return dist[static_cast<std::size_t>(grid.sink)];
}

}  // namespace test_oracles
