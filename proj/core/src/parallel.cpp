#include "countergm/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace countergm {

void parallel_for(std::size_t n_tasks, int workers, const std::function<void(std::size_t)>& fn) {
  if (n_tasks == 0) return;
  const auto n_threads = static_cast<std::size_t>(std::max(1, workers));
  if (n_threads == 1 || n_tasks == 1) {
    for (std::size_t t = 0; t < n_tasks; ++t) fn(t);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1, std::memory_order_relaxed);
      if (t >= n_tasks) return;
      try {
        fn(t);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n_tasks, std::memory_order_relaxed);
        return;
      }
    }
  };

  {
    std::vector<std::jthread> pool;
    pool.reserve(std::min(n_threads, n_tasks) - 1);
    for (std::size_t i = 1; i < std::min(n_threads, n_tasks); ++i) pool.emplace_back(worker);
    worker();
  }
  if (error) std::rethrow_exception(error);
}

int hardware_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

}  // namespace countergm
