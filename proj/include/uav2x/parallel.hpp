#pragma once

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace uav2x {

// Replica parallelism cap from the environment; 0 means sequential.
inline int threads_from_env() {
  const char* v = std::getenv("UAV2X_THREADS");
  if (!v) return static_cast<int>(std::thread::hardware_concurrency());
  return std::atoi(v);
}

// Runs fn(i) for i in [0, n). Tasks must be independent; results written to
// per-index slots stay deterministic for any thread count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const std::size_t count = std::min<std::size_t>(threads, n);
  pool.reserve(count);
  for (std::size_t i = 0; i < count; ++i) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();
}

}  // namespace uav2x
