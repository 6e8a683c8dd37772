#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace snn {

// Execution policy for batch-level kernels. Parallel shards the batch over
// OpenMP threads; Serial is the reference path used to validate it.
enum class Exec { Serial, Parallel };

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

inline int thread_id() {
#ifdef _OPENMP
  return omp_get_thread_num();
#else
  return 0;
#endif
}

inline int team_size() {
#ifdef _OPENMP
  return omp_get_num_threads();
#else
  return 1;
#endif
}

// Contiguous static shard of [0, n) for thread `tid` of `nthreads`. The
// deterministic split is what makes parallel reductions reproducible: shards
// are always reduced in thread order.
struct Shard {
  int begin = 0;
  int end = 0;
};

inline Shard shard_of(int n, int tid, int nthreads) {
  const int base = n / nthreads;
  const int extra = n % nthreads;
  const int begin = tid * base + (tid < extra ? tid : extra);
  const int len = base + (tid < extra ? 1 : 0);
  return {begin, begin + len};
}

}  // namespace snn
