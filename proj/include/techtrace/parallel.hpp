#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace techtrace {

// Runs fn(task) for task in [0, n) on up to `threads` threads. Tasks are
// handed out in contiguous blocks; the first exception thrown is rethrown.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::clamp(threads, 1, std::max(1, n));
  if (threads == 1) {
    for (int task = 0; task < n; ++task) fn(task);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      const int begin = static_cast<int>(static_cast<long>(n) * w / threads);
      const int end = static_cast<int>(static_cast<long>(n) * (w + 1) / threads);
      try {
        for (int task = begin; task < end; ++task) fn(task);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline int default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace techtrace
