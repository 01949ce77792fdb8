#pragma once

#include <cstddef>
#include <functional>

namespace numpar {

// Worker count for parallel sections: `requested` if positive, otherwise the
// hardware concurrency, in both cases capped by the NUMPAR_THREADS env var.
int worker_count(int requested = 0);

// Runs body(0..n-1) on up to `threads` workers. Each index must touch only
// its own slots; results are then independent of the schedule. The first
// exception (lowest index) is rethrown after all workers join.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace numpar
