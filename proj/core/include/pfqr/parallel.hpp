#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pfqr {

/// Clamps a requested worker count to [1, hardware_concurrency * 4].
int resolve_threads(int requested) noexcept;

/// Calls body(i) for i in [0, count) on up to `threads` workers. Each index is
/// processed exactly once; results must be written to per-index slots so the
/// outcome does not depend on scheduling. If any call throws, the exception of
/// the lowest failing index is rethrown after all workers finish.
template <class Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
  const auto workers = static_cast<std::size_t>(resolve_threads(threads));
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex guard;
  std::size_t failed_index = count;
  std::exception_ptr failure;
  auto run = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(guard);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::jthread> pool;
  const std::size_t spawned = std::min(workers, count) - 1;
  pool.reserve(spawned);
  for (std::size_t t = 0; t < spawned; ++t) pool.emplace_back(run);
  run();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace pfqr
