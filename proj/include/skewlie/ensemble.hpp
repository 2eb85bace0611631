#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace skewlie {

/// Run fn(i) for i in [0, count) on `threads` workers. Work is handed out in
/// fixed-size shards; callers write results into slot i, so the reduction
/// order never depends on the schedule. If several paths throw, the exception
/// of the lowest index is rethrown.
template <typename Fn>
void for_each_path(std::size_t count, unsigned threads, Fn&& fn) {
  constexpr std::size_t kShard = 64;
  threads = std::max(1u, threads);
  if (threads == 1 || count <= kShard) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const std::size_t begin = next.fetch_add(kShard);
      if (begin >= count) return;
      const std::size_t end = std::min(count, begin + kShard);
      for (std::size_t i = begin; i < end; ++i) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (i < error_index) {
            error_index = i;
            error = std::current_exception();
          }
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace skewlie
