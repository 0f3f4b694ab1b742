#pragma once

#include <cstddef>
#include <functional>

namespace cfslab {

// Worker count: CFSLAB_THREADS if set (>= 1), otherwise the hardware concurrency.
int thread_budget();

// Runs fn(i) for i in [0, n).  Results must be written to per-index slots so the
// outcome does not depend on scheduling.  The exception thrown at the lowest index
// is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace cfslab
