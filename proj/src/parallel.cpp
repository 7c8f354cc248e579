#include "awh/parallel.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace awh::par {

namespace {
bool g_enabled =
#if defined(_OPENMP)
    true;
#else
    false;
#endif
}  // namespace

bool enabled() { return g_enabled; }

void set_enabled(bool on) {
#if defined(_OPENMP)
  g_enabled = on;
#else
  g_enabled = false;
  (void)on;
#endif
}

int thread_count() {
#if defined(_OPENMP)
  return g_enabled ? omp_get_max_threads() : 1;
#else
  return 1;
#endif
}

}  // namespace awh::par
