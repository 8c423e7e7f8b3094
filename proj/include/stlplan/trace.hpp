#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "stlplan/errors.hpp"
#include "stlplan/geometry.hpp"

namespace stlplan {

/// Closed time interval [lower, upper] in seconds.
struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Inclusive range of sample indices.
struct IndexRange {
  std::ptrdiff_t first = 0;
  std::ptrdiff_t last = 0;

  [[nodiscard]] std::ptrdiff_t size() const { return last - first + 1; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Uniform sampling 0, Ts, ..., N·Ts.
class TimeGrid {
 public:
  TimeGrid() = default;

  TimeGrid(double sample_period, double horizon) : sample_period_(sample_period) {
    if (!(sample_period > 0.0) || !std::isfinite(sample_period))
      throw InvalidArgument("sample period must be positive");
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw InvalidArgument("horizon must be non-negative");
    const double steps = std::round(horizon / sample_period);
    if (std::abs(steps * sample_period - horizon) > 1e-9 * sample_period)
      throw Misalignment("horizon " + std::to_string(horizon) + " s is not a multiple of the sample period");
    steps_ = static_cast<std::ptrdiff_t>(steps);
  }

  static TimeGrid from_steps(double sample_period, std::ptrdiff_t steps) {
    return TimeGrid(sample_period, static_cast<double>(steps) * sample_period);
  }

  [[nodiscard]] double sample_period() const { return sample_period_; }
  [[nodiscard]] std::ptrdiff_t steps() const { return steps_; }
  [[nodiscard]] std::ptrdiff_t count() const { return steps_ + 1; }
  [[nodiscard]] double horizon() const { return static_cast<double>(steps_) * sample_period_; }
  [[nodiscard]] double time(std::ptrdiff_t k) const { return static_cast<double>(k) * sample_period_; }

  /// Grid index of time t; throws Misalignment unless t is within 1e-9·Ts of a grid point.
  [[nodiscard]] std::ptrdiff_t index_of(double t) const {
    const double r = std::round(t / sample_period_);
    if (std::abs(r * sample_period_ - t) > 1e-9 * sample_period_)
      throw Misalignment("time " + std::to_string(t) + " s is not on the sampling grid");
    return static_cast<std::ptrdiff_t>(r);
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double sample_period_ = 1.0;
  std::ptrdiff_t steps_ = 0;
};

/// Maps an interval in seconds onto grid indices; the interval must lie in [0, horizon].
inline IndexRange interval_to_indices(const Interval& interval, const TimeGrid& grid) {
  const double slack = 1e-9 * grid.sample_period();
  if (interval.lower < -slack || interval.upper > grid.horizon() + slack || interval.lower > interval.upper)
    throw OutOfRange("interval [" + std::to_string(interval.lower) + ", " + std::to_string(interval.upper) +
                     "] is outside [0, " + std::to_string(grid.horizon()) + "]");
  return IndexRange{grid.index_of(interval.lower), grid.index_of(interval.upper)};
}

enum class Channel { Position, Velocity };

/// Positions and velocities of q drones at every grid sample, stored sample-major.
class Trace {
 public:
  Trace() = default;
  Trace(TimeGrid grid, std::size_t drone_count)
      : grid_(grid),
        drones_(drone_count),
        position_(static_cast<std::size_t>(grid.count()) * drone_count, Vec3::Zero()),
        velocity_(position_.size(), Vec3::Zero()) {}

  [[nodiscard]] const TimeGrid& grid() const { return grid_; }
  [[nodiscard]] std::size_t drone_count() const { return drones_; }
  [[nodiscard]] std::ptrdiff_t sample_count() const { return grid_.count(); }

  [[nodiscard]] Vec3& position(std::ptrdiff_t k, std::size_t drone) { return position_[slot(k, drone)]; }
  [[nodiscard]] const Vec3& position(std::ptrdiff_t k, std::size_t drone) const { return position_[slot(k, drone)]; }
  [[nodiscard]] Vec3& velocity(std::ptrdiff_t k, std::size_t drone) { return velocity_[slot(k, drone)]; }
  [[nodiscard]] const Vec3& velocity(std::ptrdiff_t k, std::size_t drone) const { return velocity_[slot(k, drone)]; }

  [[nodiscard]] const Vec3& channel(Channel c, std::ptrdiff_t k, std::size_t drone) const {
    return c == Channel::Position ? position(k, drone) : velocity(k, drone);
  }
  [[nodiscard]] Vec3& channel(Channel c, std::ptrdiff_t k, std::size_t drone) {
    return c == Channel::Position ? position(k, drone) : velocity(k, drone);
  }

  [[nodiscard]] bool all_finite() const {
    for (std::size_t i = 0; i < position_.size(); ++i)
      if (!position_[i].allFinite() || !velocity_[i].allFinite()) return false;
    return true;
  }

  friend bool operator==(const Trace&, const Trace&) = default;

 private:
  [[nodiscard]] std::size_t slot(std::ptrdiff_t k, std::size_t drone) const {
    return static_cast<std::size_t>(k) * drones_ + drone;
  }

  TimeGrid grid_;
  std::size_t drones_ = 0;
  std::vector<Vec3> position_;
  std::vector<Vec3> velocity_;
};

/// Gradient of a scalar with respect to every position/velocity entry of a Trace.
using TraceGradient = Trace;

}  // namespace stlplan
