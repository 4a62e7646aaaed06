#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace gspec {

// Runs fn(0), ..., fn(count-1) across up to `threads` workers.
//
// Work items are claimed through an atomic counter, so scheduling is dynamic,
// but callers are expected to make each item's output depend only on its index
// (counter-based RNG streams, preallocated result slots). Under that contract
// results are bit-identical for any thread count. The first exception thrown
// by a work item is rethrown on the calling thread once all workers finish.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  if (threads == 0) threads = 1;
  std::size_t nworkers = std::min<std::size_t>(threads, count);
  if (nworkers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(nworkers);
  for (std::size_t w = 0; w < nworkers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline unsigned default_threads() {
  if (const char* env = std::getenv("GSPEC_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

} // namespace gspec
