#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ionboost {

// Runs fn(chunk) for chunk in [0, chunks) on `workers` threads, chunk c going to
// worker c % workers. Callers write per-chunk results into their own slots so
// the reduction is independent of the worker count. The first exception thrown
// by any chunk is rethrown after all threads join.
template <typename Fn>
void parallel_chunks(std::size_t chunks, std::size_t workers, Fn&& fn) {
  if (workers <= 1 || chunks <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) fn(c);
    return;
  }
  if (workers > chunks) workers = chunks;
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t c = w; c < chunks; c += workers) fn(c);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace ionboost
