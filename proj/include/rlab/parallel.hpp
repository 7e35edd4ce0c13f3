#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "rlab/defaults.hpp"

namespace rlab {

/// Runs body(i) for i in [0, n) on a bounded set of threads. Each index must
/// write only its own outputs; results never depend on the thread count.
namespace detail {
inline bool& inside_parallel_region() {
  thread_local bool flag = false;
  return flag;
}
}  // namespace detail

/// Nested calls run serially on the calling worker.
template <class F>
void parallel_for(Eigen::Index n, F&& body, int threads = 0) {
  if (threads <= 0) threads = worker_count();
  threads = static_cast<int>(std::min<Eigen::Index>(threads, n));
  if (threads <= 1 || detail::inside_parallel_region()) {
    for (Eigen::Index i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      detail::inside_parallel_region() = true;
      try {
        for (Eigen::Index i = t; i < n; i += threads) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace rlab
