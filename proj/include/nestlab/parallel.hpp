#pragma once

#include <cstdint>
#include <functional>

namespace nestlab {

/// Worker count: NESTLAB_THREADS if set, else hardware concurrency.
int worker_count();

/// Runs fn(i) for i in [0, n). Each index is handled by exactly one worker;
/// callers write results into per-index slots and reduce in index order.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

}  // namespace nestlab
