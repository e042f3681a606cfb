#pragma once

// Slow, obviously-correct reference computations shared by the tests.

#include <cmath>
#include <functional>
#include <vector>

#include "cltb/linalg.hpp"

namespace oracle {

inline double naive_dot(const std::vector<double>& a, const std::vector<double>& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(s);
}

// Largest eigenvalue of a symmetric PSD matrix by power iteration.
inline double power_iteration(const cltb::Matrix& a, int iters = 20000) {
  const std::size_t k = a.rows();
  std::vector<double> v(k, 1.0), w(k);
  for (std::size_t i = 0; i < k; ++i) v[i] += 0.01 * static_cast<double>(i);
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < k; ++i) {
      w[i] = 0;
      for (std::size_t j = 0; j < k; ++j) w[i] += a(i, j) * v[j];
    }
    double norm = 0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    double next = 0;
    for (std::size_t i = 0; i < k; ++i) next += v[i] * w[i];
    double vv = 0;
    for (double x : v) vv += x * x;
    next /= vv;
    for (std::size_t i = 0; i < k; ++i) v[i] = w[i] / norm;
    if (it > 10 && std::abs(next - lambda) < 1e-15 * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

// (1/#) sum over ordered distinct index tuples of length 2 or 4.
inline double distinct_pairs_mean(const std::vector<double>& b) {
  long double s = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      if (i != j) s += static_cast<long double>(b[i]) * b[j], ++count;
  return static_cast<double>(s / count);
}

inline double distinct_quads_mean(const std::vector<double>& a) {
  const std::size_t n = a.size();
  long double s = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l)
          if (i != j && i != k && i != l && j != k && j != l && k != l)
            s += static_cast<long double>(a[i]) * a[j] * a[k] * a[l], ++count;
  return static_cast<double>(s / count);
}

// Max of |f| over a uniform grid in [lo, hi]^k.
inline double grid_max(const std::function<double(const std::vector<double>&)>& f, std::size_t k,
                       double lo, double hi, std::size_t points) {
  std::vector<std::size_t> idx(k, 0);
  std::vector<double> x(k);
  double best = 0.0;
  while (true) {
    for (std::size_t i = 0; i < k; ++i)
      x[i] = lo + (hi - lo) * static_cast<double>(idx[i]) / static_cast<double>(points - 1);
    best = std::max(best, std::abs(f(x)));
    std::size_t d = 0;
    while (d < k && ++idx[d] == points) idx[d++] = 0;
    if (d == k) break;
  }
  return best;
}

}  // namespace oracle
