#ifndef VEM_PARALLEL_HPP
#define VEM_PARALLEL_HPP

#include <cstddef>

namespace vem {

/// Execution mode for the element-loop kernels. Every parallel kernel has a
/// serial twin that produces bit-identical results; results are always merged
/// in element-index order, never by thread arrival.
enum class Exec { Serial, OpenMP };

template <typename Fn>
void parallel_for(std::ptrdiff_t n, Exec mode, Fn&& fn)
{
  if (mode == Exec::Serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
    return;
  }
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
}

} // namespace vem

#endif
