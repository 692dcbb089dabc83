#pragma once

#include <cstddef>
#include <functional>

namespace qcat {

/// Thread cap from CHESHIRE_THREADS, else hardware concurrency (at least 1).
std::size_t default_thread_count();

/// Runs task(i) for every i in [0, tasks) on up to `threads` workers.
/// Callers write results into per-index slots and reduce them in index
/// order afterwards, so the outcome never depends on the thread count.
void parallel_for(std::size_t tasks, std::size_t threads, const std::function<void(std::size_t)>& task);

}  // namespace qcat
