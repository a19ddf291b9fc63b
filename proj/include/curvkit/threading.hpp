#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace curvkit {

/// Worker cap for grid sweeps. CURVKIT_THREADS overrides the hardware
/// default; values < 1 are clamped to 1.
inline int max_threads() {
  static const int cached = [] {
    if (const char* env = std::getenv("CURVKIT_THREADS")) {
      char* end = nullptr;
      long v = std::strtol(env, &end, 10);
      if (end != env && v >= 1) return static_cast<int>(std::min(v, 256L));
      return 1;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
  }();
  return cached;
}

/// Splits [0, n) into at most `max_threads()` contiguous chunks and runs
/// `body(begin, end)` on each. Chunk boundaries depend only on n, never on
/// the thread count observed at runtime, so per-chunk partial results can
/// be combined in index order for bit-stable reductions.
inline void parallel_chunks(long n,
                            const std::function<void(long, long, int)>& body) {
  if (n <= 0) return;
  const int nchunks = static_cast<int>(std::min<long>(n, 64));
  const long step = (n + nchunks - 1) / nchunks;
  const int workers = std::min(max_threads(), nchunks);
  if (workers <= 1) {
    for (int c = 0; c < nchunks; ++c) {
      const long b = c * step;
      const long e = std::min(n, b + step);
      if (b < e) body(b, e, c);
    }
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int c = w; c < nchunks; c += workers) {
        const long b = c * step;
        const long e = std::min(n, b + step);
        if (b < e) body(b, e, c);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace curvkit
