#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace strata {

// Worker count from STRATA_THREADS, else the hardware concurrency.
int thread_count();

// Runs body(i) for i in [0, count). Results must go to per-index slots so the
// outcome does not depend on scheduling. The exception thrown by the lowest
// failing index is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace strata
