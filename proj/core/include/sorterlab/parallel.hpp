#pragma once

#include <cstddef>
#include <functional>

namespace sorterlab {

// Worker cap: SORTERLAB_THREADS environment variable, where 0 or unset means
// hardware concurrency.
int max_threads();

// Runs fn(i) for i in [0, n) across worker threads. Results must be written to
// caller-owned slots indexed by i, which keeps output ordering deterministic
// regardless of execution order. Exceptions from workers are rethrown on the
// calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace sorterlab
