#pragma once

#include <atomic>
#include <thread>
#include <vector>

namespace msgd {

/// Run fn(0..count-1) across hardware threads. Callers write results into
/// index-addressed slots, so output order never depends on scheduling.
template <typename Fn>
void parallel_for(int count, Fn&& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers = std::min<int>(count, static_cast<int>(hw));
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace msgd
