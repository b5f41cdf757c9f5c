#pragma once

#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "confsep/types.hpp"

namespace confsep {

/// Runs fn(i) for i in [0, n) across at most `threads` workers. Work items
/// must be independent; results keyed by index stay deterministic regardless
/// of thread count. The first exception thrown by a worker is rethrown.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (threads < 1) throw ValidationError("parallel_for: threads must be >= 1");
  if (threads == 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = std::min(threads, n);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace confsep
