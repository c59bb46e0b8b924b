#include "regretcov/problems.hpp"

#include <algorithm>
#include <numeric>

namespace regretcov {

namespace {

struct Item {
  int index;
  double value;
  double weight;
};

// Fractional relaxation bound for the tail items [pos, end) given remaining
// capacity; items are sorted by value density.
double fractional_bound(const std::vector<Item>& items, std::size_t pos, double capacity) {
  double bound = 0.0;
  for (std::size_t i = pos; i < items.size(); ++i) {
    if (items[i].value <= 0.0) break;  // density-sorted: the rest cannot help
    if (items[i].weight <= capacity) {
      bound += items[i].value;
      capacity -= items[i].weight;
    } else {
      bound += items[i].value * (capacity / items[i].weight);
      break;
    }
  }
  return bound;
}

struct Search {
  const std::vector<Item>& items;
  double best = 0.0;
  std::vector<char> best_take;
  std::vector<char> take;

  void dfs(std::size_t pos, double value, double capacity) {
    if (value > best) {
      best = value;
      best_take = take;
    }
    if (pos == items.size()) return;
    if (value + fractional_bound(items, pos, capacity) <= best) return;

    // Include first (items are density-sorted, high-value branch leads).
    if (items[pos].weight <= capacity && items[pos].value > 0.0) {
      take[pos] = 1;
      dfs(pos + 1, value + items[pos].value, capacity - items[pos].weight);
      take[pos] = 0;
    }
    dfs(pos + 1, value, capacity);
  }
};

}  // namespace

DecisionVector solve_knapsack(const KnapsackInstance& inst, const Eigen::VectorXd& values) {
  const int d = inst.num_items();
  if (values.size() != d) throw std::invalid_argument("solve_knapsack: values dimension mismatch");
  if (!values.allFinite()) throw std::invalid_argument("solve_knapsack: values must be finite");

  std::vector<Item> items(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i)
    items[static_cast<std::size_t>(i)] = {i, values(i), inst.weights(i)};
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    const double da = a.value / a.weight, db = b.value / b.weight;
    if (da != db) return da > db;
    return a.index < b.index;
  });

  Search search{items, 0.0, {}, std::vector<char>(static_cast<std::size_t>(d), 0)};
  search.best_take = search.take;
  search.dfs(0, 0.0, inst.capacity);

  DecisionVector out;
  out.z = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < items.size(); ++i)
    if (search.best_take[i]) out.z(items[i].index) = 1.0;
  out.objective = values.dot(out.z);
  return out;
}

}  // namespace regretcov
