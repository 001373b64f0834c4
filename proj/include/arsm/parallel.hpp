#pragma once

#include <cstddef>
#include <functional>

namespace arsm {

/// Worker cap: ARSM_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Indices are
/// split into fixed contiguous chunks, so any body that only writes its own
/// slot gives results independent of scheduling. The first exception thrown
/// by a worker is rethrown on the caller's thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace arsm
