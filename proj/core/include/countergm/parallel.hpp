#pragma once

#include <cstddef>
#include <functional>

namespace countergm {

/// Runs fn(task) for every task in [0, n_tasks) on up to `workers` threads.
/// Tasks are claimed dynamically; callers that need reproducible output write each
/// task's result into its own slot and reduce in task order afterwards.
/// The first exception thrown by any task is rethrown on the calling thread.
void parallel_for(std::size_t n_tasks, int workers, const std::function<void(std::size_t)>& fn);

/// std::thread::hardware_concurrency() with a floor of 1.
int hardware_workers();

}  // namespace countergm
