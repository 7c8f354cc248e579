#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace awh {

// Neumaier-compensated accumulator. Used wherever a test pins a
// residual near machine precision (oracle sums, variance identities).
class Kahan {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }
  void reset() { sum_ = comp_ = 0.0; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// log(sum_i exp(v_i)) with a single max subtraction; finite for
// offsets up to roughly +-700.
inline double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  Kahan acc;
  for (double x : v) acc.add(std::exp(x - m));
  return m + std::log(acc.value());
}

// out_i = exp(v_i) / sum_j exp(v_j), stabilized. Entries are strictly
// positive whenever every v_i is finite.
inline void softmax_into(std::span<const double> v, std::span<double> out) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - m);
    s += out[i];
  }
  for (std::size_t i = 0; i < v.size(); ++i) out[i] /= s;
}

inline std::vector<double> softmax(std::span<const double> v) {
  std::vector<double> out(v.size());
  softmax_into(v, out);
  return out;
}

// Weighted variance sum_i p_i g_i^2 - (sum_i p_i g_i)^2, compensated.
inline double weighted_variance(std::span<const double> p,
                                std::span<const double> g) {
  Kahan mean, sq;
  for (std::size_t i = 0; i < p.size(); ++i) {
    mean.add(p[i] * g[i]);
    sq.add(p[i] * g[i] * g[i]);
  }
  const double m = mean.value();
  return sq.value() - m * m;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  Kahan acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc.add(a[i] * b[i]);
  return acc.value();
}

}  // namespace awh
