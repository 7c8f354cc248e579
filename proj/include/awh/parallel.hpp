#pragma once

#include <cstdint>
#include <vector>

#include "awh/numeric.hpp"

namespace awh::par {

// Runtime switch between the OpenMP kernels and the serial reference
// path. Both paths run the identical chunked algorithm, so results are
// bitwise equal regardless of the switch or the thread count; tests
// assert exactly that.
bool enabled();
void set_enabled(bool on);
int thread_count();

inline constexpr std::int64_t kChunk = 1024;

#if defined(_OPENMP)
#define AWH_PRAGMA(x) _Pragma(#x)
#else
#define AWH_PRAGMA(x)
#endif

template <class F>
void for_index(std::int64_t n, F&& body) {
  if (enabled()) {
    AWH_PRAGMA(omp parallel for schedule(static))
    for (std::int64_t i = 0; i < n; ++i) body(i);
  } else {
    for (std::int64_t i = 0; i < n; ++i) body(i);
  }
}

// Deterministic reduction: fixed-size chunks are summed independently
// (compensated) and combined in chunk order.
template <class F>
double sum(std::int64_t n, F&& term) {
  if (n <= 0) return 0.0;
  const std::int64_t nchunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(std::size_t(nchunks), 0.0);
  for_index(nchunks, [&](std::int64_t c) {
    Kahan acc;
    const std::int64_t hi = std::min(n, (c + 1) * kChunk);
    for (std::int64_t i = c * kChunk; i < hi; ++i) acc.add(term(i));
    partial[std::size_t(c)] = acc.value();
  });
  Kahan total;
  for (double x : partial) total.add(x);
  return total.value();
}

template <class F>
double max(std::int64_t n, F&& term) {
  const std::int64_t nchunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(std::size_t(nchunks), 0.0);
  for_index(nchunks, [&](std::int64_t c) {
    double m = -std::numeric_limits<double>::infinity();
    const std::int64_t hi = std::min(n, (c + 1) * kChunk);
    for (std::int64_t i = c * kChunk; i < hi; ++i) m = std::max(m, term(i));
    partial[std::size_t(c)] = m;
  });
  double m = -std::numeric_limits<double>::infinity();
  for (double x : partial) m = std::max(m, x);
  return m;
}

}  // namespace awh::par
