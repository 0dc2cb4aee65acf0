#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "slaterec/core/errors.hpp"
#include "slaterec/core/rng.hpp"

namespace slaterec {

inline bool is_distribution(std::span<const double> p, double tol) {
  if (p.empty()) return false;
  double total = 0.0;
  for (double v : p) {
    if (!(v >= -tol) || !std::isfinite(v)) return false;
    total += v;
  }
  return std::abs(total - 1.0) <= tol;
}

/// Inverse-CDF draw without validation. The last index with positive mass
/// absorbs round-off.
inline std::size_t sample_index(Rng& rng, std::span<const double> p) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) last_positive = i;
    acc += p[i];
    if (u < acc) return i;
  }
  return last_positive;
}

/// Numerically stable softmax.
inline std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

/// Symmetric Dirichlet draw; concentration 1 is uniform on the simplex,
/// smaller values favour sparse points.
inline std::vector<double> sample_simplex(Rng& rng, std::size_t n, double concentration = 1.0) {
  std::vector<double> out(n);
  double total = 0.0;
  for (double& v : out) {
    v = concentration == 1.0 ? rng.exponential() : rng.gamma(concentration);
    total += v;
  }
  if (!(total > 0.0)) {
    // All draws underflowed; fall back to a vertex.
    std::fill(out.begin(), out.end(), 0.0);
    out[rng.index(n)] = 1.0;
    return out;
  }
  for (double& v : out) v /= total;
  return out;
}

inline double total_variation(std::span<const double> p, std::span<const double> q) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  return 0.5 * acc;
}

}  // namespace slaterec
