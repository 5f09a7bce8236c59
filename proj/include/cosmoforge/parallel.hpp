#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cosmoforge {

// Resolves a requested worker count; 0 means "all hardware threads".
inline std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

// Calls fn(i) for every i in [0, n) on up to `workers` threads. Work items
// are claimed dynamically, so callers must write results into per-index
// slots; the outcome is then independent of scheduling. The first exception
// thrown by any item is rethrown after all threads join.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::min(resolve_workers(workers), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::jthread> threads;
  threads.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) threads.emplace_back(body);
  body();
  threads.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace cosmoforge
