#pragma once

#include <cstddef>
#include <functional>

namespace mrf {

// Number of workers to use: the MRF_THREADS environment variable if set to a
// positive integer, else the explicit request if > 0, else
// std::thread::hardware_concurrency().
int resolve_worker_count(int requested = 0);

// Runs fn(i) for i in [0, count) on `workers` threads using static block
// assignment.  Blocks until every call returns.  fn must only write to
// per-index slots; exceptions from fn are rethrown on the calling thread.
//
// Work is pre-partitioned, so which indices run on which worker is a pure
// function of (count, workers) -- nothing about the result order can depend
// on scheduling.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace mrf
