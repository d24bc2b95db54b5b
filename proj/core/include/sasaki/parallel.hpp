#pragma once

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace sasaki {

/// Worker count used by node-parallel loops. Capped by the SASAKI_THREADS
/// environment variable (read once); defaults to the hardware concurrency.
inline int worker_count() {
  static const int cached = [] {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("SASAKI_THREADS")) {
      const int cap = std::atoi(env);
      if (cap >= 1 && cap < hw) hw = cap;
    }
    return hw;
  }();
  return cached;
}

/// Chunked parallel loop over [begin, end). Each index is visited exactly
/// once and workers only write to disjoint outputs, so results do not depend
/// on the thread count. Reductions stay serial for determinism.
template <typename F>
void parallel_for(std::int64_t begin, std::int64_t end, F&& body) {
  const std::int64_t count = end - begin;
  const int workers = worker_count();
  if (count < 2048 || workers == 1) {
    for (std::int64_t i = begin; i < end; ++i) body(i);
    return;
  }
  const std::int64_t chunk = (count + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const std::int64_t lo = begin + w * chunk;
    const std::int64_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::int64_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace sasaki
