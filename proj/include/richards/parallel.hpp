#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace richards {

/// Worker cap from RICHARDS_THREADS (0 or unset = hardware concurrency).
inline unsigned worker_count()
{
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RICHARDS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0)
      return unsigned(v);
  }
  return hw;
}

/// Calls fn(i) for i in [0, n) on up to `workers` threads, in contiguous chunks.
///
/// fn must only write to slots owned by i; results are then independent of the worker count.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned workers = worker_count())
{
  constexpr std::size_t min_chunk = 512;
  const std::size_t chunks = std::min<std::size_t>(workers, (n + min_chunk - 1) / min_chunk);
  if (chunks <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t lo = n * c / chunks, hi = n * (c + 1) / chunks;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i)
        fn(i);
    });
  }
  for (auto& t : pool)
    t.join();
}

} // namespace richards
