#pragma once

#include <cstdint>

namespace fplap {

// Global worker count. 0 = use the OpenMP default, 1 = serial reference path.
// Every parallel loop in this library computes each item with a fixed internal
// summation order, so results are bit-identical for any worker count.
void set_workers(int w);
int workers();

// Parallel loop over [0, n). f(i) must not touch state shared with other
// indices except through disjoint output slots.
template <typename F>
void parallel_for(long n, F&& f);

namespace detail {
void run_omp(long n, void (*trampoline)(void*, long), void* ctx);
bool use_omp();
}

template <typename F>
void parallel_for(long n, F&& f) {
  if (n <= 0) return;
  if (!detail::use_omp() || n == 1) {
    for (long i = 0; i < n; ++i) f(i);
    return;
  }
  auto call = [](void* ctx, long i) { (*static_cast<F*>(ctx))(i); };
  detail::run_omp(n, call, &f);
}

}  // namespace fplap
