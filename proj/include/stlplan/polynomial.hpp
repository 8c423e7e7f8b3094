#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace stlplan::poly {

/// Real roots of c2·s² + c1·s + c0 (degenerate leading terms fall back to lower degree).
inline std::vector<double> quadratic_roots(double c2, double c1, double c0) {
  const double scale = std::max({std::abs(c2), std::abs(c1), std::abs(c0)});
  if (scale == 0.0) return {};
  if (std::abs(c2) <= 1e-14 * scale) {
    if (std::abs(c1) <= 1e-14 * scale) return {};
    return {-c0 / c1};
  }
  const double disc = c1 * c1 - 4.0 * c2 * c0;
  if (disc < 0.0) return {};
  if (disc == 0.0) return {-c1 / (2.0 * c2)};
  // cancellation-free form
  const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
  return {q / c2, c0 / q};
}

/// Real roots of c3·s³ + c2·s² + c1·s + c0 via Cardano / the trigonometric form, each polished by Newton.
inline std::vector<double> cubic_roots(double c3, double c2, double c1, double c0) {
  const double scale = std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
  if (scale == 0.0) return {};
  if (std::abs(c3) <= 1e-14 * scale) return quadratic_roots(c2, c1, c0);

  const double a = c2 / c3;
  const double b = c1 / c3;
  const double c = c0 / c3;
  // depressed cubic t³ + p t + q with s = t - a/3
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double shift = -a / 3.0;
  const double disc = q * q / 4.0 + p * p * p / 27.0;

  std::vector<double> roots;
  if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    roots.push_back(std::cbrt(-q / 2.0 + sq) + std::cbrt(-q / 2.0 - sq) + shift);
  } else if (p == 0.0) {
    roots.push_back(shift);
  } else {
    const double r = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * r), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) roots.push_back(r * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0) + shift);
  }

  for (double& s : roots) {
    for (int it = 0; it < 3; ++it) {
      const double f = ((c3 * s + c2) * s + c1) * s + c0;
      const double df = (3.0 * c3 * s + 2.0 * c2) * s + c1;
      if (df == 0.0) break;
      const double next = s - f / df;
      if (!std::isfinite(next)) break;
      s = next;
    }
  }
  return roots;
}

}  // namespace stlplan::poly
