#pragma once

#include <cstddef>
#include <functional>

namespace pairtest {

// Number of worker threads used for a request; 0 means hardware default.
unsigned resolve_workers(unsigned requested);

/// Runs fn(i) for every i in [0, count) across `workers` threads.
///
/// fn must only write state owned by index i; under that contract the
/// combined result is identical for any worker count, including 1. The
/// first exception thrown by any invocation is rethrown on the caller.
void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace pairtest
