#include "regretcov/problems.hpp"

#include <json.hpp>

#include <cmath>

namespace regretcov {

namespace {

// Feasibility + boundedness check shared by the LpInstance constructors.
void validate_region(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                     const std::vector<RowSense>& senses, bool nonneg) {
  const int n = static_cast<int>(A.cols());
  if (!b.allFinite() || !A.allFinite())
    throw std::invalid_argument("LpInstance: A and b must be finite");

  if (nonneg) {
    // Feasibility, then boundedness via max sum z (z >= 0 makes the sum a
    // bounding box certificate).
    simplex_solve(A, b, senses, Eigen::VectorXd::Zero(n));
    try {
      simplex_solve(A, b, senses, Eigen::VectorXd::Constant(n, -1.0));
    } catch (const Unbounded&) {
      throw Unbounded("LpInstance: feasible region unbounded");
    }
    return;
  }

  // Free variables: split z = u - v and probe each coordinate range.
  Eigen::MatrixXd As(A.rows(), 2 * n);
  As.leftCols(n) = A;
  As.rightCols(n) = -A;
  simplex_solve(As, b, senses, Eigen::VectorXd::Zero(2 * n));
  for (int j = 0; j < n; ++j) {
    for (double sign : {1.0, -1.0}) {
      Eigen::VectorXd c = Eigen::VectorXd::Zero(2 * n);
      c(j) = sign;
      c(n + j) = -sign;
      try {
        simplex_solve(As, b, senses, c);
      } catch (const Unbounded&) {
        throw Unbounded("LpInstance: feasible region unbounded");
      }
    }
  }
}

}  // namespace

LpInstance::LpInstance(Eigen::MatrixXd A, Eigen::VectorXd b, bool nonneg)
    : A_(std::move(A)), b_(std::move(b)),
      senses_(static_cast<std::size_t>(A_.rows()), RowSense::le), nonneg_(nonneg) {
  if (A_.rows() != b_.size()) throw std::invalid_argument("LpInstance: dimension mismatch");
  validate_region(A_, b_, senses_, nonneg_);
}

LpInstance::LpInstance(Eigen::MatrixXd A, Eigen::VectorXd b, std::vector<RowSense> senses,
                       bool nonneg)
    : A_(std::move(A)), b_(std::move(b)), senses_(std::move(senses)), nonneg_(nonneg) {
  if (A_.rows() != b_.size() || senses_.size() != static_cast<std::size_t>(A_.rows()))
    throw std::invalid_argument("LpInstance: dimension mismatch");
  validate_region(A_, b_, senses_, nonneg_);
}

DecisionVector solve_lp(const LpInstance& inst, const Eigen::VectorXd& cost) {
  const int n = inst.num_vars();
  if (cost.size() != n) throw std::invalid_argument("solve_lp: cost dimension mismatch");

  SimplexResult s;
  if (inst.nonneg()) {
    s = simplex_solve(inst.A(), inst.b(), inst.senses(), cost);
  } else {
    Eigen::MatrixXd As(inst.A().rows(), 2 * n);
    As.leftCols(n) = inst.A();
    As.rightCols(n) = -inst.A();
    Eigen::VectorXd cs(2 * n);
    cs.head(n) = cost;
    cs.tail(n) = -cost;
    s = simplex_solve(As, inst.b(), inst.senses(), cs);
    Eigen::VectorXd z = s.x.head(n) - s.x.tail(n);
    s.x = std::move(z);
  }

  DecisionVector out;
  out.z = std::move(s.x);
  out.objective = cost.dot(out.z);
  out.status = s.alternate_optima ? SolveStatus::tie_broken : SolveStatus::optimal;
  return out;
}

LpInstance random_lp(int n_vars, int n_constraints, Seed seed) {
  if (n_vars < 1 || n_constraints < 1)
    throw std::invalid_argument("random_lp: dimensions must be >= 1");
  Rng rng(seed);
  for (int attempt = 0; attempt < 100; ++attempt) {
    Eigen::MatrixXd A(n_constraints, n_vars);
    Eigen::VectorXd b(n_constraints);
    for (int i = 0; i < n_constraints; ++i) {
      for (int j = 0; j < n_vars; ++j) A(i, j) = rng.normal();
      b(i) = std::abs(rng.normal()) + 1.0;
    }
    try {
      return LpInstance(std::move(A), std::move(b), true);
    } catch (const Unbounded&) {
      continue;  // redraw
    }
  }
  throw GenerationFailed("random_lp: no bounded draw in 100 attempts");
}

Polyhedron Polyhedron::box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  const int n = static_cast<int>(lower.size());
  if (upper.size() != n) throw std::invalid_argument("Polyhedron::box: bound mismatch");
  Polyhedron p;
  p.A = Eigen::MatrixXd::Zero(2 * n, n);
  p.b = Eigen::VectorXd(2 * n);
  for (int j = 0; j < n; ++j) {
    p.A(j, j) = 1.0;
    p.b(j) = upper(j);
    p.A(n + j, j) = -1.0;
    p.b(n + j) = -lower(j);
  }
  p.nonneg = false;
  return p;
}

QpInstance::QpInstance(Eigen::MatrixXd Q_in, double lambda,
                       std::optional<Polyhedron> constraints_in)
    : Q(std::move(Q_in)), risk_aversion(lambda), constraints(std::move(constraints_in)) {
  if (Q.rows() != Q.cols()) throw std::invalid_argument("QpInstance: Q must be square");
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() >
      1e-10 * std::max(1.0, Q.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("QpInstance: Q must be symmetric");
  if (lambda < 0.0) throw std::invalid_argument("QpInstance: lambda must be >= 0");
  Q = 0.5 * (Q + Q.transpose());
}

KnapsackInstance::KnapsackInstance(Eigen::VectorXd weights_in, double capacity_in)
    : weights(std::move(weights_in)), capacity(capacity_in) {
  if (weights.size() < 1 || (weights.array() <= 0.0).any())
    throw std::invalid_argument("KnapsackInstance: weights must be positive");
  if (capacity < 0.0) throw std::invalid_argument("KnapsackInstance: capacity must be >= 0");
}

KnapsackInstance KnapsackInstance::half_capacity(Eigen::VectorXd weights_in) {
  const double cap = weights_in.sum() / 2.0;
  return KnapsackInstance(std::move(weights_in), cap);
}

DecisionVector KnapsackProblem::do_solve(const Eigen::VectorXd& cost) const {
  DecisionVector d = solve_knapsack(inst_, -cost);
  d.objective = cost.dot(d.z);
  return d;
}

GridFlowInstance build_grid(int rows, int cols) {
  if (rows < 2 || cols < 2) throw std::invalid_argument("build_grid: rows, cols must be >= 2");
  GridFlowInstance g;
  g.rows = rows;
  g.cols = cols;
  auto node = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c + 1 < cols; ++c) g.edges.emplace_back(node(r, c), node(r, c + 1));
  for (int r = 0; r + 1 < rows; ++r)
    for (int c = 0; c < cols; ++c) g.edges.emplace_back(node(r, c), node(r + 1, c));
  g.source = 0;
  g.sink = rows * cols - 1;
  g.incidence = Eigen::MatrixXd::Zero(g.num_nodes(), g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) {
    g.incidence(g.edges[static_cast<std::size_t>(e)].first, e) = 1.0;
    g.incidence(g.edges[static_cast<std::size_t>(e)].second, e) = -1.0;
  }
  return g;
}

LpInstance grid_lp_view(const GridFlowInstance& grid) {
  Eigen::VectorXd supply = Eigen::VectorXd::Zero(grid.num_nodes());
  supply(grid.source) = 1.0;
  supply(grid.sink) = -1.0;
  std::vector<RowSense> senses(static_cast<std::size_t>(grid.num_nodes()), RowSense::eq);
  return LpInstance(grid.incidence, supply, std::move(senses), true);
}

BoxProblem::BoxProblem(Eigen::VectorXd lower, Eigen::VectorXd upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size() || (lower_.array() > upper_.array()).any())
    throw std::invalid_argument("BoxProblem: invalid bounds");
}

DecisionVector BoxProblem::do_solve(const Eigen::VectorXd& cost) const {
  DecisionVector d;
  d.z = Eigen::VectorXd(dim());
  bool tie = false;
  for (int j = 0; j < dim(); ++j) {
    if (cost(j) == 0.0) tie = tie || lower_(j) != upper_(j);
    d.z(j) = cost(j) < 0.0 ? upper_(j) : lower_(j);
  }
  d.objective = cost.dot(d.z);
  d.status = tie ? SolveStatus::tie_broken : SolveStatus::optimal;
  return d;
}

// ------------------------------------------------------------- JSON I/O

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto r = j.size();
  const auto c = r > 0 ? j.at(0).size() : 0;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t k = 0; k < c; ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j.at(i).at(k).get<double>();
  return m;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
  return v;
}

}  // namespace

std::string instance_to_json(const LpInstance& inst) {
  nlohmann::json j;
  j["type"] = "lp";
  j["A"] = matrix_to_json(inst.A());
  j["b"] = vector_to_json(inst.b());
  j["nonneg"] = inst.nonneg();
  return j.dump();
}

std::string instance_to_json(const QpInstance& inst) {
  nlohmann::json j;
  j["type"] = "qp";
  j["Q"] = matrix_to_json(inst.Q);
  j["lambda"] = inst.risk_aversion;
  if (inst.constraints) {
    j["A"] = matrix_to_json(inst.constraints->A);
    j["b"] = vector_to_json(inst.constraints->b);
    j["nonneg"] = inst.constraints->nonneg;
  }
  return j.dump();
}

std::string instance_to_json(const KnapsackInstance& inst) {
  nlohmann::json j;
  j["type"] = "knapsack";
  j["weights"] = vector_to_json(inst.weights);
  j["capacity"] = inst.capacity;
  return j.dump();
}

std::string instance_to_json(const GridFlowInstance& inst) {
  nlohmann::json j;
  j["type"] = "grid";
  j["rows"] = inst.rows;
  j["cols"] = inst.cols;
  return j.dump();
}

std::unique_ptr<Problem> problem_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  const std::string type = j.at("type").get<std::string>();
  if (type == "lp") {
    LpInstance inst(matrix_from_json(j.at("A")), vector_from_json(j.at("b")),
                    j.value("nonneg", true));
    return std::make_unique<LpProblem>(std::move(inst));
  }
  if (type == "qp") {
    std::optional<Polyhedron> constraints;
    if (j.contains("A")) {
      Polyhedron p;
      p.A = matrix_from_json(j.at("A"));
      p.b = vector_from_json(j.at("b"));
      p.nonneg = j.value("nonneg", false);
      constraints = std::move(p);
    }
    QpInstance inst(matrix_from_json(j.at("Q")), j.at("lambda").get<double>(),
                    std::move(constraints));
    return std::make_unique<QpProblem>(std::move(inst));
  }
  if (type == "knapsack") {
    KnapsackInstance inst(vector_from_json(j.at("weights")), j.at("capacity").get<double>());
    return std::make_unique<KnapsackProblem>(std::move(inst));
  }
  if (type == "grid") {
    return std::make_unique<GridProblem>(build_grid(j.at("rows").get<int>(), j.at("cols").get<int>()));
  }
  throw std::invalid_argument("problem_from_json: unknown type " + type);
}

}  // namespace regretcov
