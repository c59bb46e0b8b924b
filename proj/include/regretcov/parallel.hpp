#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace regretcov {

/// Worker cap: hardware concurrency, reduced by the REGRET_THREADS env var.
inline int worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("REGRET_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1 && cap < n) n = cap;
  }
  return n;
}

/**
 * Run fn(i) for i in [0, n). Tasks must write only to their own output
 * slot; results are then independent of scheduling, so parallel runs are
 * bit-identical to serial ones.
 */
template <class Fn>
void parallel_for(long n, Fn&& fn) {
  const int workers = worker_count();
  if (workers == 1 || n <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  const int used = static_cast<int>(std::min<long>(workers, n));
  pool.reserve(used);
  for (int w = 0; w < used; ++w) {
    pool.emplace_back([&] {
      for (long i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace regretcov
