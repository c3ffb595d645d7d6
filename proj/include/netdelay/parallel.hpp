#pragma once

#include <cstddef>
#include <functional>

namespace netdelay {

/// Worker count from NETDELAY_WORKERS, falling back to the hardware
/// concurrency (at least 1).
std::size_t worker_count();

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Work items are
/// claimed dynamically; callers must write results by index. The first
/// exception thrown by any item is rethrown after all workers join.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn);

inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    parallel_for(count, worker_count(), fn);
}

} // namespace netdelay
