#pragma once

#include <span>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace swflood {

/// Static-schedule parallel loop over a block list. Bodies must write
/// disjoint data; reductions go through per-block arrays combined serially
/// afterwards, so results are identical for any worker count.
template <class Fn>
void parallel_for_blocks(std::span<const int> blocks, int workers, Fn&& fn) {
  if (workers <= 1 || blocks.size() < 2) {
    for (int ib : blocks) fn(ib);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(workers)
  for (long idx = 0; idx < static_cast<long>(blocks.size()); ++idx) fn(blocks[idx]);
#else
  for (int ib : blocks) fn(ib);
#endif
}

/// Same contract as parallel_for_blocks, over an index range.
template <class Fn>
void parallel_for_index(std::size_t n, int workers, Fn&& fn) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(workers)
  for (long i = 0; i < static_cast<long>(n); ++i) fn(static_cast<std::size_t>(i));
#else
  for (std::size_t i = 0; i < n; ++i) fn(i);
#endif
}

inline int hardware_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace swflood
