#pragma once

#include <cstddef>

namespace diqkd {

// Execution policy for the sweep/simulation kernels. `serial` is the plain-loop
// reference used by tests and the benchmark; `parallel` is the OpenMP path.
// Per-index counter-based seeding guarantees both produce identical output.
enum class Exec { serial, parallel };

template <typename Fn>
void for_each_index(std::size_t n, Exec exec, Fn&& fn) {
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      fn(static_cast<std::size_t>(i));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
  }
}

}  // namespace diqkd
