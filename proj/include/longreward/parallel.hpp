#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace longreward {

// Runs fn(0..n-1) on at most `max_workers` threads (inline when <= 1).
// After all indices finish, rethrows the exception of the lowest failing
// index, so results never depend on completion order.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t max_workers, Fn&& fn) {
  if (n == 0) return;
  const std::size_t workers = std::min(n, std::max<std::size_t>(max_workers, 1));
  std::vector<std::exception_ptr> errors(n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace longreward
