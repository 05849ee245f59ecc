#pragma once

#include <cstdint>
#include <functional>

namespace gnrf {

// Worker cap: GRASPNERF_THREADS env var if set, else hardware concurrency.
int max_threads();
void set_max_threads(int n);  // n <= 0 restores the default

// Runs body(begin, end) over a disjoint partition of [0, n). Each index is
// processed by exactly one worker, so writes to per-index outputs are
// deterministic regardless of the worker count. Runs inline when n is small
// or only one worker is allowed.
void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& body, int64_t min_per_thread = 256);

}  // namespace gnrf
