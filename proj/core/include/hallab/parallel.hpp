// parallel.hpp — shared-counter worker pool for independent sweep items
#pragma once

#include <functional>

namespace hallab {

// Runs fn(i) for i in [0, n) on up to `threads` workers pulling indices from
// a shared atomic counter. The first exception is rethrown on the caller.
// Callers write results into pre-sized slots so completion order is moot.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace hallab
