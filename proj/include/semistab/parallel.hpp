#pragma once

// Fixed-partition worker pool. Results are written to caller-owned slots, so the
// outcome never depends on the thread count.

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace semistab {

/// SEMISTAB_THREADS if set to a positive integer, else 1.
inline unsigned default_thread_count() {
  if (const char* env = std::getenv("SEMISTAB_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return unsigned(std::min(v, 256L));
    } catch (...) {
    }
  }
  return 1;
}

/// Calls fn(i) for i in [0, count). If several calls throw, the exception of the
/// lowest index is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, unsigned(std::max<std::size_t>(count, 1))));
  std::exception_ptr first_error;
  std::size_t first_index = count;
  std::mutex mu;
  auto run = [&](unsigned w) {
    for (std::size_t i = w; i < count; i += threads) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < first_index) {
          first_index = i;
          first_error = std::current_exception();
        }
      }
    }
  };
  if (threads == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace semistab
