#pragma once

// Deterministic chunked parallel loop. Results must be written to disjoint
// per-index slots (or reduced per chunk in fixed order) so the output does
// not depend on scheduling. The worker count is a process-wide cap.

#include <algorithm>
#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace hemiparam {

inline int& max_threads() {
  static int n = 1;
  return n;
}

inline void set_max_threads(int n) { max_threads() = std::max(1, n); }

namespace detail {

inline int chunk_count(int n) { return std::max(1, std::min(max_threads(), n)); }

// body(chunk, begin, end) over [0, n) split into chunk_count(n) chunks.
inline void parallel_chunks(int n, const std::function<void(int, int, int)>& body) {
  int workers = chunk_count(n);
  if (workers <= 1) {
    body(0, 0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    int begin = static_cast<int>(static_cast<long long>(n) * w / workers);
    int end = static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
    pool.emplace_back([&, w, begin, end] { body(w, begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

}  // namespace hemiparam
