#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace sphereproc {

namespace detail {

inline int& thread_budget_storage() {
  static int budget = [] {
    if (const char* env = std::getenv("SPHEREPROC_THREADS")) {
      const int v = std::atoi(env);
      if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
  }();
  return budget;
}

}  // namespace detail

inline int thread_budget() { return detail::thread_budget_storage(); }
inline void set_thread_budget(int n) { detail::thread_budget_storage() = std::max(1, n); }

/// Runs fn(i) for i in [0, n). Work items must be independent; each index is
/// processed exactly once, so results written to per-index slots are
/// deterministic regardless of the number of worker threads.
template <class Fn>
void parallel_for(std::size_t n, const Fn& fn, int max_threads = 0) {
  if (n == 0) return;
  int workers = max_threads > 0 ? std::min(max_threads, thread_budget()) : thread_budget();
  workers = static_cast<int>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers - 1);
  for (int t = 1; t < workers; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace sphereproc
