#pragma once

#include <cstddef>
#include <functional>

namespace tfwi {

/// Worker count: TFWI_NUM_WORKERS if set to a positive integer, else the
/// hardware concurrency (at least 1).
int worker_count();

/// Calls body(i) for i in [0, count) on up to worker_count() threads. Items
/// are claimed in increasing order; the first exception is rethrown after
/// all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace tfwi
