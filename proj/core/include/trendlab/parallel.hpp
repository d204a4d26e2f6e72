#pragma once

#include <cstddef>
#include <functional>

namespace trendlab {

/// Worker cap: explicit request, else TRENDLAB_THREADS, else hardware concurrency.
unsigned resolve_threads(unsigned requested);

/// Calls body(i) for i in [0, count) on up to `threads` workers. Each index runs exactly once;
/// the first exception is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace trendlab
