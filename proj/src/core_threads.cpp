#include "gnrf/core/threads.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace gnrf {

namespace {
std::atomic<int> g_max_threads{0};

int default_threads() {
  if (const char* env = std::getenv("GRASPNERF_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}
}  // namespace

int max_threads() {
  int n = g_max_threads.load(std::memory_order_relaxed);
  return n > 0 ? n : default_threads();
}

void set_max_threads(int n) { g_max_threads.store(n, std::memory_order_relaxed); }

void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& body, int64_t min_per_thread) {
  if (n <= 0) return;
  int workers = max_threads();
  int64_t usable = std::max<int64_t>(1, n / std::max<int64_t>(1, min_per_thread));
  workers = static_cast<int>(std::min<int64_t>(workers, usable));
  if (workers <= 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers) - 1);
  int64_t chunk = (n + workers - 1) / workers;
  for (int t = 1; t < workers; ++t) {
    int64_t b = t * chunk, e = std::min<int64_t>(n, (t + 1) * chunk);
    if (b >= e) break;
    pool.emplace_back([&body, b, e] { body(b, e); });
  }
  body(0, std::min<int64_t>(chunk, n));
  for (auto& th : pool) th.join();
}

}  // namespace gnrf
