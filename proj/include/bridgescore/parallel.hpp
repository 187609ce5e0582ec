#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bridgescore {

/// Execution mode for the batch sweeps. Results are bit-identical in both
/// modes: sweeps write per-index slots and all reductions run serially in
/// index order afterwards.
enum class ExecMode { serial, parallel };

inline int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

template <class Body>
void parallel_for(std::size_t n, ExecMode mode, Body&& body) {
#ifdef _OPENMP
  if (mode == ExecMode::parallel) {
    const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 16)
    for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
    return;
  }
#else
  (void)mode;
#endif
  for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace bridgescore
