#pragma once

#include <cstddef>
#include <exception>

#include <omp.h>

namespace ucorrect {

inline int hardware_workers() { return omp_get_num_procs(); }

// OpenMP loop over [0, n). The first exception thrown by any iteration is
// rethrown on the calling thread after the loop joins. threads <= 0 means the
// OpenMP default team size.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 0) threads = omp_get_max_threads();
  std::exception_ptr error;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic) num_threads(threads) if (threads > 1 && count > 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(ucorrect_parallel_error)
      {
        if (!error) error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace ucorrect
