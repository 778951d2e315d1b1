#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "nlsgi/types.hpp"

namespace nlsgi {

// Threads requested by the caller, clamped to [1, n]. 0 means 1.
inline int effective_threads(int requested, Index n) {
  Index t = std::max(1, requested);
  return static_cast<int>(std::max<Index>(1, std::min(t, n)));
}

// Runs body(i, worker) for i in [0, n). Items are handed out dynamically, so
// bodies must write only to slots owned by i; results are then independent of
// scheduling. The exception from the lowest failing index is rethrown.
template <class Body>
void parallel_for(Index n, int threads, Body&& body) {
  const int t = effective_threads(threads, n);
  if (t == 1) {
    for (Index i = 0; i < n; ++i) body(i, 0);
    return;
  }
  std::atomic<Index> next{0};
  std::mutex err_mutex;
  std::exception_ptr err;
  Index err_index = n;
  auto work = [&](int worker) {
    for (;;) {
      const Index i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i, worker);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (i < err_index) {
          err_index = i;
          err = std::current_exception();
        }
      }
    }
  };
  std::vector<std::jthread> pool;
  for (int w = 1; w < t; ++w) pool.emplace_back(work, w);
  work(0);
  pool.clear();
  if (err) std::rethrow_exception(err);
}

}  // namespace nlsgi
