#pragma once

#include <cstddef>
#include <functional>

namespace revlab {

/// Runs fn(i) for i in [0, n) on up to `workers` threads (0 means hardware concurrency).
/// Work items must write only to their own output slots; the first exception by index
/// order is rethrown after all workers finish.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

}  // namespace revlab
