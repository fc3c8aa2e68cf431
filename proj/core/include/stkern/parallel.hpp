#pragma once

#include <cstddef>
#include <functional>

namespace stkern {

/// Worker count: hardware concurrency, capped by the STKERN_THREADS
/// environment variable when set.
unsigned thread_count();

/// Runs fn(i) for i in [0, n). Work is split into contiguous chunks; callers
/// must write results into per-index slots so the outcome is independent of
/// the thread count. Exceptions are rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace stkern
