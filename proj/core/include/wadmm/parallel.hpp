#pragma once

#include <exception>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace wadmm {

// Runs body(i) for i in [0, n) on at most `threads` OS threads with the fixed
// assignment i % T -> thread. Per-index work touches only caller-owned slots
// and all reductions stay with the caller, so results are identical for any
// thread count. The join acts as the barrier between pipeline phases.
//
// The first failing index (by index order) is rethrown after the join, tagged
// with its worker index.
inline void parallel_for_workers(int n, int threads,
                                 const std::function<void(int)>& body) {
  if (n <= 0) return;
  std::vector<std::exception_ptr> errors(n);
  const int T = std::max(1, std::min(threads, n));
  if (T == 1) {
    for (int i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::vector<std::thread> pool;
    pool.reserve(T);
    for (int t = 0; t < T; ++t) {
      pool.emplace_back([&, t]() {
        for (int i = t; i < n; i += T) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (int i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw std::runtime_error("worker " + std::to_string(i) + ": " + e.what());
    }
  }
}

}  // namespace wadmm
