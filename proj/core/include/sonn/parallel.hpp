#pragma once

#include <cstddef>
#include <functional>

namespace sonn {

/// Worker thread count. Read once from SONN_THREADS; unset falls back to the
/// hardware concurrency, 0 or 1 selects the sequential reference path.
int thread_count();

/// Runs body(begin, end) over a partition of [0, count). Items are never split
/// mid-index and every item is handled exactly once, so any kernel whose items
/// write disjoint outputs produces bit-identical results at every thread
/// count. Small workloads (count * work_per_item below an internal threshold)
/// run inline.
void parallel_for(std::size_t count, std::size_t work_per_item,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace sonn
