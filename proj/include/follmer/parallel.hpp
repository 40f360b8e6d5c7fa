#pragma once

#include <cstddef>
#include <functional>

namespace follmer {

/// Worker count: FOLLMER_KIT_THREADS if set and positive, otherwise the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, count). Each index is handled exactly once;
/// callers write results by index so the outcome does not depend on
/// scheduling. The first exception thrown by a body is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace follmer
