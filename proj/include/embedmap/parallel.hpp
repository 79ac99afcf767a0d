#pragma once

#include <cstddef>
#include <functional>

namespace embedmap {

// Worker cap: EMBEDMAP_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
std::size_t ThreadCount();

// Calls fn(i) for every i in [0, n). Work is split into contiguous chunks;
// the first exception thrown by any worker is rethrown on the caller.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& fn,
                 std::size_t min_chunk = 1);

}  // namespace embedmap
