#pragma once

#include <algorithm>
#include <cmath>
#include <span>

namespace stlplan {

/// (1/c)·log Σ exp(c·x_i), shifted by the largest argument.
inline double smooth_max(std::span<const double> xs, double c) {
  const double m = *std::max_element(xs.begin(), xs.end());
  double sum = 0.0;
  for (double x : xs) sum += std::exp(c * (x - m));
  return m + std::log(sum) / c;
}

/// -(1/c)·log Σ exp(-c·x_i), shifted by the smallest argument.
inline double smooth_min(std::span<const double> xs, double c) {
  const double m = *std::min_element(xs.begin(), xs.end());
  double sum = 0.0;
  for (double x : xs) sum += std::exp(-c * (x - m));
  return m - std::log(sum) / c;
}

/// Partial derivatives of smooth_max at xs, given its value: the softmax of c·x.
inline void smooth_max_weights(std::span<const double> xs, double value, double c, std::span<double> out) {
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = std::exp(c * (xs[i] - value));
}

inline void smooth_min_weights(std::span<const double> xs, double value, double c, std::span<double> out) {
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = std::exp(-c * (xs[i] - value));
}

/// Exact max/min aggregation (Def. of robustness); weights select the first extreme element.
struct ExactSemantics {
  [[nodiscard]] double max(std::span<const double> xs) const { return *std::max_element(xs.begin(), xs.end()); }
  [[nodiscard]] double min(std::span<const double> xs) const { return *std::min_element(xs.begin(), xs.end()); }
  void max_weights(std::span<const double> xs, double, std::span<double> out) const {
    one_hot(out, static_cast<std::size_t>(std::max_element(xs.begin(), xs.end()) - xs.begin()));
  }
  void min_weights(std::span<const double> xs, double, std::span<double> out) const {
    one_hot(out, static_cast<std::size_t>(std::min_element(xs.begin(), xs.end()) - xs.begin()));
  }

 private:
  static void one_hot(std::span<double> out, std::size_t at) {
    std::fill(out.begin(), out.end(), 0.0);
    out[at] = 1.0;
  }
};

/// Log-sum-exp aggregation with scale c.
struct SmoothSemantics {
  double c = 5.0;

  [[nodiscard]] double max(std::span<const double> xs) const { return smooth_max(xs, c); }
  [[nodiscard]] double min(std::span<const double> xs) const { return smooth_min(xs, c); }
  void max_weights(std::span<const double> xs, double v, std::span<double> out) const {
    smooth_max_weights(xs, v, c, out);
  }
  void min_weights(std::span<const double> xs, double v, std::span<double> out) const {
    smooth_min_weights(xs, v, c, out);
  }
};

}  // namespace stlplan
