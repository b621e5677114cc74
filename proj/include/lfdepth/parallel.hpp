#pragma once

#include <exception>
#include <mutex>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lfd {

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline int resolve_threads(int threads) { return threads > 0 ? threads : hardware_threads(); }

// Runs fn(0..n-1). threads <= 1 takes the plain serial loop, which is the
// reference path the tests compare the OpenMP run against. Work items must
// write disjoint outputs; results are then independent of the thread count.
// Exceptions are captured and the first one rethrown after the loop.
template <class Fn>
void for_each_index(int n, int threads, Fn&& fn) {
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
#ifdef _OPENMP
  std::exception_ptr err;
  std::mutex err_mutex;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (int i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(err_mutex);
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
#else
  for (int i = 0; i < n; ++i) fn(i);
#endif
}

}  // namespace lfd
