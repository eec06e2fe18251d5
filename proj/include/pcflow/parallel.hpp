#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace pcflow {

// Worker count for elementwise kernels, read once from PCFLOW_THREADS.
// Unset means 1 (fully sequential). Reductions never go through here.
int thread_count();

// Override for tests; pass 0 to fall back to the environment.
void set_thread_count(int n);

template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n / 4096 + 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (std::size_t i = 0; i < std::min(n, chunk); ++i) fn(i);
}

}  // namespace pcflow
