#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <string>
#include <vector>

#include "stlplan/errors.hpp"
#include "stlplan/polynomial.hpp"
#include "stlplan/trace.hpp"

namespace stlplan {

/// Position, velocity and acceleration along one axis.
struct AxisState {
  double p = 0.0;
  double v = 0.0;
  double a = 0.0;

  friend bool operator==(const AxisState&, const AxisState&) = default;
};

/// Quintic primitive with constant snap-rate alpha, snap beta and jerk gamma at tau = 0:
///   p(t) = alpha/120 t^5 + beta/24 t^4 + gamma/6 t^3 + a0/2 t^2 + v0 t + p0
struct SplineSegment {
  AxisState start;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double duration = 1.0;

  friend bool operator==(const SplineSegment&, const SplineSegment&) = default;
};

/// Closed-form coefficients joining two boundary states over `duration` seconds.
inline SplineSegment solve_boundary(const AxisState& start, const AxisState& end, double duration) {
  if (!(duration > 0.0) || !std::isfinite(duration)) throw InvalidArgument("segment duration must be positive");
  const double t = duration;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double t5 = t2 * t3;
  const double dp = end.p - start.p - start.v * t - 0.5 * start.a * t2;
  const double dv = end.v - start.v - start.a * t;
  const double da = end.a - start.a;
  SplineSegment s;
  s.start = start;
  s.duration = duration;
  s.alpha = (720.0 * dp - 360.0 * t * dv + 60.0 * t2 * da) / t5;
  s.beta = (-360.0 * t * dp + 168.0 * t2 * dv - 24.0 * t3 * da) / t5;
  s.gamma = (60.0 * t2 * dp - 24.0 * t3 * dv + 3.0 * t2 * t2 * da) / t5;
  return s;
}

namespace detail {
inline AxisState eval_unchecked(const SplineSegment& s, double tau) {
  const double t = tau;
  const double t2 = t * t;
  const double t3 = t2 * t;
  AxisState out;
  out.p = s.alpha / 120.0 * t2 * t3 + s.beta / 24.0 * t2 * t2 + s.gamma / 6.0 * t3 + 0.5 * s.start.a * t2 +
          s.start.v * t + s.start.p;
  out.v = s.alpha / 24.0 * t2 * t2 + s.beta / 6.0 * t3 + 0.5 * s.gamma * t2 + s.start.a * t + s.start.v;
  out.a = s.alpha / 6.0 * t3 + 0.5 * s.beta * t2 + s.gamma * t + s.start.a;
  return out;
}
}  // namespace detail

/// State at local time tau in [0, duration].
inline AxisState eval(const SplineSegment& s, double tau) {
  const double slack = 1e-12 * std::max(1.0, s.duration);
  if (tau < -slack || tau > s.duration + slack)
    throw OutOfRange("tau = " + std::to_string(tau) + " outside [0, " + std::to_string(s.duration) + "]");
  return detail::eval_unchecked(s, std::clamp(tau, 0.0, s.duration));
}

inline double jerk(const SplineSegment& s, double tau) { return 0.5 * s.alpha * tau * tau + s.beta * tau + s.gamma; }

/// Interior critical points of v (roots of a) and of a (roots of jerk), in (0, duration).
struct CriticalPoints {
  std::vector<double> velocity;
  std::vector<double> acceleration;
};

inline CriticalPoints critical_points(const SplineSegment& s) {
  const double t = s.duration;
  CriticalPoints out;
  // normalized time u = tau / T keeps the degeneracy tests scale-free
  for (double u : poly::cubic_roots(s.alpha * t * t * t / 6.0, 0.5 * s.beta * t * t, s.gamma * t, s.start.a))
    if (u > 0.0 && u < 1.0) out.velocity.push_back(u * t);
  for (double u : poly::quadratic_roots(0.5 * s.alpha * t * t, s.beta * t, s.gamma))
    if (u > 0.0 && u < 1.0) out.acceleration.push_back(u * t);
  return out;
}

struct Feasibility {
  bool feasible = true;
  double peak_v = 0.0;
  double peak_a = 0.0;
  double peak_jerk = 0.0;
};

/// Peak |v| and |a| over the segment from endpoints plus interior critical points.
inline Feasibility segment_feasible(const SplineSegment& s, double v_max, double a_max) {
  if (!(v_max > 0.0) || !(a_max > 0.0)) throw InvalidArgument("velocity and acceleration bounds must be positive");
  const AxisState end = detail::eval_unchecked(s, s.duration);
  Feasibility f;
  f.peak_v = std::max(std::abs(s.start.v), std::abs(end.v));
  f.peak_a = std::max(std::abs(s.start.a), std::abs(end.a));
  const auto cp = critical_points(s);
  for (double tau : cp.velocity) f.peak_v = std::max(f.peak_v, std::abs(detail::eval_unchecked(s, tau).v));
  for (double tau : cp.acceleration) f.peak_a = std::max(f.peak_a, std::abs(detail::eval_unchecked(s, tau).a));
  f.peak_jerk = std::max(std::abs(jerk(s, 0.0)), std::abs(jerk(s, s.duration)));
  if (s.alpha != 0.0) {
    const double tv = -s.beta / s.alpha;
    if (tv > 0.0 && tv < s.duration) f.peak_jerk = std::max(f.peak_jerk, std::abs(jerk(s, tv)));
  }
#ifndef NDEBUG
  {
    // dense-sampling cross-check
    constexpr int kSamples = 1000;
    double sv = 0.0;
    double sa = 0.0;
    for (int i = 0; i <= kSamples; ++i) {
      const AxisState x = detail::eval_unchecked(s, s.duration * i / kSamples);
      sv = std::max(sv, std::abs(x.v));
      sa = std::max(sa, std::abs(x.a));
    }
    assert(sv <= f.peak_v + 1e-9 * std::max(1.0, f.peak_v));
    assert(sa <= f.peak_a + 1e-9 * std::max(1.0, f.peak_a));
  }
#endif
  f.feasible = f.peak_v <= v_max && f.peak_a <= a_max;
  return f;
}

/// Knot states joined by quintic segments of equal duration.
struct AxisTrajectory {
  std::vector<AxisState> knots;
  std::vector<SplineSegment> segments;
  double knot_period = 1.0;

  [[nodiscard]] double horizon() const { return knot_period * static_cast<double>(segments.size()); }

  /// State at absolute time t in [0, horizon].
  [[nodiscard]] AxisState at(double t) const {
    const double slack = 1e-9 * knot_period;
    if (t < -slack || t > horizon() + slack) throw OutOfRange("time outside trajectory");
    auto k = static_cast<std::ptrdiff_t>(std::floor(t / knot_period + 1e-9));
    k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(segments.size()) - 1);
    return detail::eval_unchecked(segments[static_cast<std::size_t>(k)],
                                  std::clamp(t - static_cast<double>(k) * knot_period, 0.0, knot_period));
  }

  friend bool operator==(const AxisTrajectory&, const AxisTrajectory&) = default;
};

/// One solve_boundary per adjacent pair of knots.
inline AxisTrajectory propagate(const std::vector<AxisState>& knots, double knot_period) {
  if (knots.size() < 2) throw InvalidArgument("a trajectory needs at least two knots");
  AxisTrajectory tr;
  tr.knots = knots;
  tr.knot_period = knot_period;
  tr.segments.reserve(knots.size() - 1);
  for (std::size_t k = 0; k + 1 < knots.size(); ++k)
    tr.segments.push_back(solve_boundary(knots[k], knots[k + 1], knot_period));
  return tr;
}

/// Number of sampling steps per knot period; throws Misalignment unless integral.
inline std::ptrdiff_t steps_per_knot(double knot_period, double sample_period) {
  const double r = std::round(knot_period / sample_period);
  if (r < 1.0 || std::abs(r * sample_period - knot_period) > 1e-9 * sample_period)
    throw Misalignment("knot period " + std::to_string(knot_period) +
                       " s is not an integer multiple of the sample period");
  return static_cast<std::ptrdiff_t>(r);
}

/// Dense samples on `grid`; samples at knot times are the knots themselves.
inline std::vector<AxisState> sample(const AxisTrajectory& tr, const TimeGrid& grid) {
  const std::ptrdiff_t m = steps_per_knot(tr.knot_period, grid.sample_period());
  if (m * static_cast<std::ptrdiff_t>(tr.segments.size()) != grid.steps())
    throw Misalignment("sampling grid horizon does not match the trajectory horizon");
  std::vector<AxisState> out;
  out.reserve(static_cast<std::size_t>(grid.count()));
  for (std::size_t k = 0; k < tr.segments.size(); ++k) {
    out.push_back(tr.knots[k]);
    for (std::ptrdiff_t i = 1; i < m; ++i)
      out.push_back(detail::eval_unchecked(tr.segments[k], tr.knot_period * static_cast<double>(i) /
                                                               static_cast<double>(m)));
  }
  out.push_back(tr.knots.back());
  return out;
}

/// Linear map from the boundary vector (p0, v0, a0, p1, v1, a1) to the state at tau.
/// Row r of the result holds d(p, v, a)[r] / d(boundary).
using BoundaryBasis = std::array<std::array<double, 6>, 3>;

inline BoundaryBasis boundary_basis(double duration, double tau) {
  BoundaryBasis b{};
  for (int i = 0; i < 6; ++i) {
    AxisState s0;
    AxisState s1;
    double* slots[6] = {&s0.p, &s0.v, &s0.a, &s1.p, &s1.v, &s1.a};
    *slots[i] = 1.0;
    const AxisState x = detail::eval_unchecked(solve_boundary(s0, s1, duration), tau);
    b[0][static_cast<std::size_t>(i)] = x.p;
    b[1][static_cast<std::size_t>(i)] = x.v;
    b[2][static_cast<std::size_t>(i)] = x.a;
  }
  return b;
}

}  // namespace stlplan
