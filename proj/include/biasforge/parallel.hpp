#ifndef BIASFORGE_PARALLEL_HPP
#define BIASFORGE_PARALLEL_HPP

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace biasforge {

// Runs fn(i) for i in [0, n). threads <= 1 uses the plain serial loop.
// Each iteration must write only to its own output slot; under that
// contract the parallel path is bitwise identical to the serial one for
// any thread count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
#ifdef _OPENMP
  if (threads > 1) {
#pragma omp parallel for num_threads(threads) schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      fn(static_cast<std::size_t>(i));
    }
    return;
  }
#else
  (void)threads;
#endif
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace biasforge

#endif  // BIASFORGE_PARALLEL_HPP
