#pragma once

#include <cstddef>
#include <functional>

namespace inflchs {

// Worker count from INFLCHS_THREADS, else the available hardware parallelism.
unsigned worker_count();

// Calls fn(i) for i in [0, n) across worker_count() threads with static
// chunking. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace inflchs
