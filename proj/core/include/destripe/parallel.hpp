#pragma once

#include <cstddef>
#include <functional>

namespace destripe {

/// Worker cap: DESTRIPE_THREADS if set to a positive integer, else the
/// hardware concurrency (at least 1).
std::size_t thread_count();

/// Runs body(i) for i in [0, n) over up to thread_count() threads. Each index
/// is processed exactly once; the first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace destripe
