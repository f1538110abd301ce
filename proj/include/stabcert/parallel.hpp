#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace stabcert {

/// Runs fn(i) for i in [0,n) on `threads` workers. Each index writes into its
/// own output slot, so reductions done afterwards in index order are
/// deterministic regardless of the thread count.
inline void parallel_for_index(long n, const std::function<void(long)>& fn, int threads = 1) {
  if (n <= 0) return;
  threads = std::max(1, threads);
  if (threads == 1 || n == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  threads = static_cast<int>(std::min<long>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const long chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const long lo = t * chunk;
    const long hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] {
      for (long i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace stabcert
