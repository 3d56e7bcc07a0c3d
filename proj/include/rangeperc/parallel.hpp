// SPDX-License-Identifier: Apache-2.0
//
// Deterministic parallel loops. Work items are identified by index, and every
// random stream is keyed by that index, so results do not depend on the
// number of workers or on scheduling.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rangeperc {

inline unsigned default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Calls fn(i, worker) for every i in [0, count). fn must only write to
/// per-index or per-worker storage. The first exception is rethrown.
template <typename Fn>
void parallel_for(std::int64_t count, unsigned workers, Fn&& fn) {
  if (count <= 0) return;
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(
                                                         std::min<std::int64_t>(count, 1024))));
  if (workers == 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i, 0u);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&](unsigned w) {
    try {
      for (;;) {
        const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= count) break;
        fn(i, w);
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next.store(count);
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body, w);
  }
  if (error) std::rethrow_exception(error);
}

/// Effective worker count that parallel_for will use for `count` items.
inline unsigned worker_slots(std::int64_t count, unsigned workers) {
  return std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::int64_t>(
                                                      1, std::min<std::int64_t>(count, 1024)))));
}

}  // namespace rangeperc
