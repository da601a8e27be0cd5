#pragma once

#include <cstddef>
#include <functional>

namespace rome {

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Callers write
/// results into preallocated slots indexed by i and reduce afterwards in index
/// order, so results do not depend on `jobs`. The first exception thrown by a
/// body is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& body);

}  // namespace rome
