#include "fplap/parallel.hpp"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fplap {

namespace {
std::atomic<int> g_workers{0};
}

void set_workers(int w) { g_workers.store(w < 0 ? 0 : w); }

int workers() { return g_workers.load(); }

namespace detail {

bool use_omp() {
#ifdef _OPENMP
  return g_workers.load() != 1;
#else
  return false;
#endif
}

void run_omp(long n, void (*trampoline)(void*, long), void* ctx) {
#ifdef _OPENMP
  const int w = g_workers.load();
  if (w > 0) {
#pragma omp parallel for schedule(static) num_threads(w)
    for (long i = 0; i < n; ++i) trampoline(ctx, i);
  } else {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) trampoline(ctx, i);
  }
#else
  for (long i = 0; i < n; ++i) trampoline(ctx, i);
#endif
}

}  // namespace detail
}  // namespace fplap
