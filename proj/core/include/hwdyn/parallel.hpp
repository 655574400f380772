#pragma once

#include <cstddef>
#include <functional>

namespace hwdyn {

/// Upper bound on worker threads used by library routines. 0 means
/// hardware concurrency. Results never depend on this value.
void set_max_threads(unsigned n);
unsigned max_threads();

/// Calls fn(i) for i in [0, n) across up to max_threads() workers. Each
/// index is visited exactly once; callers write results into slot i so the
/// outcome is independent of scheduling. The first exception thrown by any
/// call is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace hwdyn
