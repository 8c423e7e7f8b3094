#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "stlplan/ascent.hpp"
#include "stlplan/config.hpp"
#include "stlplan/errors.hpp"
#include "stlplan/formula.hpp"
#include "stlplan/mission.hpp"
#include "stlplan/motion_primitives.hpp"
#include "stlplan/robustness.hpp"
#include "stlplan/trace.hpp"

namespace stlplan {

using DroneAxes = std::array<AxisTrajectory, 3>;
using DroneKnots = std::array<std::vector<AxisState>, 3>;

/// Positions/velocities (as a Trace) plus accelerations for every drone on one grid.
struct SampledFleet {
  Trace trace;
  std::vector<Vec3> acceleration;

  SampledFleet() = default;
  SampledFleet(const TimeGrid& grid, std::size_t drones)
      : trace(grid, drones), acceleration(static_cast<std::size_t>(grid.count()) * drones, Vec3::Zero()) {}

  [[nodiscard]] Vec3& accel(std::ptrdiff_t k, std::size_t d) {
    return acceleration[static_cast<std::size_t>(k) * trace.drone_count() + d];
  }
  [[nodiscard]] const Vec3& accel(std::ptrdiff_t k, std::size_t d) const {
    return acceleration[static_cast<std::size_t>(k) * trace.drone_count() + d];
  }

  friend bool operator==(const SampledFleet&, const SampledFleet&) = default;
};

/// Writes the dense samples of one drone's three axis trajectories into `fleet`.
inline void write_samples(const DroneAxes& axes, std::size_t drone, SampledFleet& fleet) {
  const TimeGrid& grid = fleet.trace.grid();
  for (int j = 0; j < 3; ++j) {
    const auto s = sample(axes[static_cast<std::size_t>(j)], grid);
    for (std::ptrdiff_t k = 0; k < grid.count(); ++k) {
      const auto& x = s[static_cast<std::size_t>(k)];
      fleet.trace.position(k, drone)[j] = x.p;
      fleet.trace.velocity(k, drone)[j] = x.v;
      fleet.accel(k, drone)[j] = x.a;
    }
  }
}

// ---------------------------------------------------------------------------
// Problem
// ---------------------------------------------------------------------------

/// A drone whose knot states are decision variables. Knot 0 is always fixed; the last knot is
/// fixed when `fixed_terminal` is set.
struct FreeDrone {
  std::size_t drone = 0;
  DroneKnots guess;
  bool fixed_terminal = false;
};

/// A drone that follows given samples (positions, velocities, accelerations on the problem grid).
struct FixedDrone {
  std::size_t drone = 0;
  std::vector<Vec3> position;
  std::vector<Vec3> velocity;
  std::vector<Vec3> acceleration;
};

/// One axis of one free drone.
struct Block {
  std::size_t slot = 0;
  int axis = 0;

  friend bool operator==(const Block&, const Block&) = default;
};

struct Problem {
  Formula formula = pred(AffineHalfspace{});
  TimeGrid grid;
  double knot_period = 1.0;
  std::size_t fleet_size = 0;
  std::vector<FreeDrone> free;
  std::vector<FixedDrone> fixed;
  /// Blocks solved jointly. One group holds everything unless the axes were decoupled.
  std::vector<std::vector<Block>> groups;

  [[nodiscard]] std::size_t knot_count() const { return free.front().guess[0].size(); }

  [[nodiscard]] std::size_t free_knots(std::size_t slot) const {
    return knot_count() - 1 - (free[slot].fixed_terminal ? 1 : 0);
  }

  [[nodiscard]] std::size_t dimension(std::size_t group) const {
    std::size_t n = 0;
    for (const auto& b : groups[group]) n += 3 * free_knots(b.slot);
    return n;
  }
};

/// True when no predicate reads more than one (drone, axis) pair.
inline bool axis_separable(const Formula& f) {
  bool separable = true;
  for_each_predicate(f, [&](const Predicate& p) {
    if (predicate_support(p).size() > 1) separable = false;
  });
  return separable;
}

/// Generic problem assembly from a formula and per-drone knot guesses.
inline Problem make_problem(Formula formula, const TimeGrid& grid, double knot_period, std::size_t fleet_size,
                            std::vector<FreeDrone> free, std::vector<FixedDrone> fixed, bool decouple_axes) {
  if (free.empty()) throw InvalidArgument("problem has no free drone");
  const std::ptrdiff_t m = steps_per_knot(knot_period, grid.sample_period());
  const std::size_t knots = free.front().guess[0].size();
  if (knots < 2) throw InvalidArgument("problem needs at least two knots");
  if (static_cast<std::ptrdiff_t>(knots - 1) * m != grid.steps())
    throw Misalignment("horizon is not a whole number of knot periods");
  for (const auto& f : free)
    for (const auto& axis : f.guess)
      if (axis.size() != knots) throw InvalidArgument("all knot sequences must have the same length");
  for (const auto& f : fixed)
    if (f.position.size() != static_cast<std::size_t>(grid.count()) || f.velocity.size() != f.position.size() ||
        f.acceleration.size() != f.position.size())
      throw Misalignment("fixed drone samples do not match the problem grid");
  if (drones_referenced(formula) > fleet_size) throw InvalidArgument("formula references a drone outside the fleet");
  // every interval must align with the grid and fit the horizon
  (void)formula_shape(formula, grid);
  (void)evaluate(formula, Trace(grid, fleet_size), 0, 0, ExactSemantics{});

  Problem p;
  p.formula = std::move(formula);
  p.grid = grid;
  p.knot_period = knot_period;
  p.fleet_size = fleet_size;
  p.free = std::move(free);
  p.fixed = std::move(fixed);
  if (decouple_axes) {
    if (!axis_separable(p.formula)) throw InvalidArgument("decouple_axes requires an axis-separable formula");
    for (std::size_t s = 0; s < p.free.size(); ++s)
      for (int j = 0; j < 3; ++j) p.groups.push_back({Block{s, j}});
  } else {
    p.groups.emplace_back();
    for (std::size_t s = 0; s < p.free.size(); ++s)
      for (int j = 0; j < 3; ++j) p.groups.back().push_back(Block{s, j});
  }
  return p;
}

/// Knot guess: piecewise-linear positions through `waypoints` (time, position), zero v/a after knot 0.
inline DroneKnots interpolate_knots(const std::vector<std::pair<double, Vec3>>& waypoints, std::size_t knots,
                                    double knot_period, const DroneSpec& start) {
  DroneKnots out;
  for (auto& axis : out) axis.resize(knots);
  for (std::size_t k = 0; k < knots; ++k) {
    const double t = knot_period * static_cast<double>(k);
    Vec3 p = waypoints.back().second;
    for (std::size_t w = 0; w + 1 < waypoints.size(); ++w) {
      const auto& [t0, p0] = waypoints[w];
      const auto& [t1, p1] = waypoints[w + 1];
      if (t >= t0 && t <= t1) {
        const double s = t1 > t0 ? (t - t0) / (t1 - t0) : 1.0;
        p = p0 + s * (p1 - p0);
        break;
      }
    }
    for (int j = 0; j < 3; ++j) out[static_cast<std::size_t>(j)][k] = AxisState{p[j], 0.0, 0.0};
  }
  for (int j = 0; j < 3; ++j)
    out[static_cast<std::size_t>(j)][0] = AxisState{start.position[j], start.velocity[j], start.acceleration[j]};
  return out;
}

/// Waypoints home -> assigned target centres spread over [0, D] -> home by (D + T)/2 -> home at T.
inline std::vector<std::pair<double, Vec3>> mission_waypoints(const Mission& m, const TargetAssignment& a,
                                                              std::size_t drone) {
  const auto& spec = m.drones[drone];
  const auto& mine = a.targets_of[drone];
  const double d = m.deadline();
  const Vec3 home = spec.home.center();
  std::vector<std::pair<double, Vec3>> w{{0.0, spec.position}};
  for (std::size_t i = 0; i < mine.size(); ++i)
    w.emplace_back(d * static_cast<double>(i + 1) / static_cast<double>(mine.size() + 1), m.targets[mine[i]].center());
  w.emplace_back(0.5 * (d + m.horizon), home);
  w.emplace_back(m.horizon, home);
  return w;
}

/// The mission problem: every drone free, objective = smooth robustness of the mission formula.
inline Problem build_problem(const Mission& mission, const PlannerConfig& config,
                             UntilReading reading = UntilReading::Flattened) {
  validate_mission(mission);
  const TimeGrid grid(config.sample_period, mission.horizon);
  const std::ptrdiff_t m = steps_per_knot(config.knot_period, config.sample_period);
  if (grid.steps() % m != 0) throw Misalignment("horizon is not a whole number of knot periods");
  const auto knots = static_cast<std::size_t>(grid.steps() / m) + 1;
  Mission copy = mission;
  copy.planner.sample_period = config.sample_period;
  const auto assignment = assign_targets(mission);
  Formula formula = build_formula(copy, assignment, reading);
  std::vector<FreeDrone> free;
  for (std::size_t d = 0; d < mission.drones.size(); ++d)
    free.push_back(FreeDrone{d,
                             interpolate_knots(mission_waypoints(mission, assignment, d), knots, config.knot_period,
                                               mission.drones[d]),
                             false});
  return make_problem(std::move(formula), grid, config.knot_period, mission.drones.size(), std::move(free), {},
                      config.decouple_axes);
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

enum class PlanStatus { Converged, IterationLimit, Infeasible };

inline const char* to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::Converged:
      return "Converged";
    case PlanStatus::IterationLimit:
      return "IterationLimit";
    case PlanStatus::Infeasible:
      return "Infeasible";
  }
  return "?";
}

struct ConstraintReport {
  double max_knot_velocity = 0.0;
  double max_knot_acceleration = 0.0;
  double peak_velocity = 0.0;
  double peak_acceleration = 0.0;
  /// Diagnostic only; jerk is not bounded.
  double peak_jerk = 0.0;
  /// Smallest inter-drone distance over all samples (infinity with one drone).
  double min_pair_distance = std::numeric_limits<double>::infinity();
  bool bounds_ok = true;

  friend bool operator==(const ConstraintReport&, const ConstraintReport&) = default;
};

struct PlanResult {
  /// Fleet index of each entry of `trajectories`.
  std::vector<std::size_t> drones;
  std::vector<DroneAxes> trajectories;
  double exact_robustness = 0.0;
  double smooth_robustness = 0.0;
  /// Σ_k ‖a(t_k)‖² over the sampling instants, per drone.
  std::vector<double> energy_total;
  /// Eliminated slack ε_k^(j) = |a^(j)(t_k)| per drone, axis and sampling instant.
  std::vector<std::array<std::vector<double>, 3>> energy_slack;
  int iterations = 0;
  PlanStatus status = PlanStatus::Infeasible;
  ConstraintReport constraint_report;
  /// Objective after each accepted iterate, one sequence per penalty round and group.
  std::vector<std::vector<double>> objective_history;
  int start_index = 0;
};

// ---------------------------------------------------------------------------
// Solver
// ---------------------------------------------------------------------------

namespace detail {

/// Knot-space evaluation of the planner objective for one problem.
class KnotObjective {
 public:
  KnotObjective(const Problem& p, const PlannerConfig& cfg)
      : p_(p), cfg_(cfg), per_knot_(steps_per_knot(p.knot_period, p.grid.sample_period())) {
    basis_.reserve(static_cast<std::size_t>(per_knot_));
    for (std::ptrdiff_t i = 0; i < per_knot_; ++i)
      basis_.push_back(boundary_basis(p.knot_period, p.knot_period * static_cast<double>(i) /
                                                         static_cast<double>(per_knot_)));
    fleet_ = SampledFleet(p.grid, p.fleet_size);
    for (const auto& f : p.fixed)
      for (std::ptrdiff_t k = 0; k < p.grid.count(); ++k) {
        const auto i = static_cast<std::size_t>(k);
        fleet_.trace.position(k, f.drone) = f.position[i];
        fleet_.trace.velocity(k, f.drone) = f.velocity[i];
        fleet_.accel(k, f.drone) = f.acceleration[i];
      }
  }

  DroneKnots& knots(std::size_t slot) { return knots_[slot]; }

  void load(std::vector<DroneKnots> knots) {
    knots_ = std::move(knots);
    for (std::size_t s = 0; s < knots_.size(); ++s)
      for (int j = 0; j < 3; ++j) resample(Block{s, j});
  }

  const std::vector<DroneKnots>& all_knots() const { return knots_; }

  /// Packs the group's free knots into x and fills the matching bounds.
  void pack(const std::vector<Block>& group, Eigen::VectorXd& x, Eigen::VectorXd& lo, Eigen::VectorXd& hi) const {
    std::size_t n = 0;
    for (const auto& b : group) n += 3 * p_.free_knots(b.slot);
    x.resize(static_cast<Eigen::Index>(n));
    lo.resize(x.size());
    hi.resize(x.size());
    Eigen::Index i = 0;
    const double inf = std::numeric_limits<double>::infinity();
    for (const auto& b : group) {
      const auto& axis = knots_[b.slot][static_cast<std::size_t>(b.axis)];
      for (std::size_t k = 1; k <= p_.free_knots(b.slot); ++k) {
        x[i] = axis[k].p;
        lo[i] = -inf;
        hi[i++] = inf;
        x[i] = axis[k].v;
        lo[i] = -cfg_.v_max;
        hi[i++] = cfg_.v_max;
        x[i] = axis[k].a;
        lo[i] = -cfg_.a_max;
        hi[i++] = cfg_.a_max;
      }
    }
  }

  void unpack(const std::vector<Block>& group, const Eigen::VectorXd& x) {
    Eigen::Index i = 0;
    for (const auto& b : group) {
      auto& axis = knots_[b.slot][static_cast<std::size_t>(b.axis)];
      for (std::size_t k = 1; k <= p_.free_knots(b.slot); ++k) {
        axis[k].p = x[i++];
        axis[k].v = x[i++];
        axis[k].a = x[i++];
      }
      resample(b);
    }
  }

  /// smooth robustness - energy_weight·Σ_k a(t_k)² - penalty_weight·Σ(peak excess)², with its gradient in x.
  /// The energy sum runs over the sampling instants t_k of the group's axes.
  double operator()(const std::vector<Block>& group, const Eigen::VectorXd& x, Eigen::VectorXd& grad,
                    double penalty_weight, double energy_weight) {
    unpack(group, x);
    const auto sg = smooth_robustness_gradient(p_.formula, fleet_.trace, 0, cfg_.c);
    double value = sg.value;
    grad.setZero(x.size());
    const auto knots = p_.knot_count();
    const double v_lim = (1.0 - cfg_.penalty_margin) * cfg_.v_max;
    const double a_lim = (1.0 - cfg_.penalty_margin) * cfg_.a_max;

    Eigen::Index base = 0;
    for (const auto& b : group) {
      const std::size_t drone = p_.free[b.slot].drone;
      const std::size_t nfree = p_.free_knots(b.slot);
      const auto& axis = knots_[b.slot][static_cast<std::size_t>(b.axis)];
      // d/d(knot k entry c) lands at base + 3(k-1) + c when knot k is free
      const auto add = [&](std::size_t k, int c, double v) {
        if (k >= 1 && k <= nfree) grad[base + static_cast<Eigen::Index>(3 * (k - 1)) + c] += v;
      };
      for (std::size_t k = 0; k + 1 < knots; ++k) {
        std::array<double, 6> dz{};
        for (std::ptrdiff_t i = 0; i < per_knot_; ++i) {
          const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(k) * per_knot_ + i;
          const double gp = sg.gradient.position(s, drone)[b.axis];
          const double gv = sg.gradient.velocity(s, drone)[b.axis];
          double ga = 0.0;
          if (energy_weight > 0.0) {
            const double acc = fleet_.accel(s, drone)[b.axis];
            value -= energy_weight * acc * acc;
            ga = -2.0 * energy_weight * acc;
          }
          if (gp == 0.0 && gv == 0.0 && ga == 0.0) continue;
          const auto& bb = basis_[static_cast<std::size_t>(i)];
          for (std::size_t z = 0; z < 6; ++z) dz[z] += gp * bb[0][z] + gv * bb[1][z] + ga * bb[2][z];
        }
        // peak penalty on interior critical points
        if (penalty_weight > 0.0) {
          const SplineSegment seg = solve_boundary(axis[k], axis[k + 1], p_.knot_period);
          const auto cp = critical_points(seg);
          const auto penalize = [&](double tau, int row, double lim) {
            const AxisState st = detail::eval_unchecked(seg, tau);
            const double val = row == 1 ? st.v : st.a;
            const double excess = std::abs(val) - lim;
            if (excess <= 0.0) return;
            value -= penalty_weight * excess * excess;
            const double coef = 2.0 * penalty_weight * excess * (val > 0.0 ? 1.0 : -1.0);
            const auto bb = boundary_basis(p_.knot_period, tau);
            for (std::size_t z = 0; z < 6; ++z) dz[z] -= coef * bb[static_cast<std::size_t>(row)][z];
          };
          for (double tau : cp.velocity) penalize(tau, 1, v_lim);
          for (double tau : cp.acceleration) penalize(tau, 2, a_lim);
        }
        for (int c = 0; c < 3; ++c) {
          add(k, c, dz[static_cast<std::size_t>(c)]);
          add(k + 1, c, dz[static_cast<std::size_t>(c + 3)]);
        }
      }
      const std::ptrdiff_t last = p_.grid.steps();
      add(knots - 1, 0, sg.gradient.position(last, drone)[b.axis]);
      add(knots - 1, 1, sg.gradient.velocity(last, drone)[b.axis]);
      if (energy_weight > 0.0) {
        const double acc = axis.back().a;
        value -= energy_weight * acc * acc;
        add(knots - 1, 2, -2.0 * energy_weight * acc);
      }
      base += static_cast<Eigen::Index>(3 * nfree);
    }
    if (!std::isfinite(value)) throw NumericalFailure("planner objective is not finite");
    return value;
  }

 private:
  void resample(const Block& b) {
    const std::size_t drone = p_.free[b.slot].drone;
    const auto& axis = knots_[b.slot][static_cast<std::size_t>(b.axis)];
    const std::size_t knots = axis.size();
    for (std::size_t k = 0; k + 1 < knots; ++k) {
      const std::array<double, 6> z{axis[k].p, axis[k].v, axis[k].a, axis[k + 1].p, axis[k + 1].v, axis[k + 1].a};
      for (std::ptrdiff_t i = 0; i < per_knot_; ++i) {
        const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(k) * per_knot_ + i;
        const auto& bb = basis_[static_cast<std::size_t>(i)];
        double p = 0.0;
        double v = 0.0;
        double a = 0.0;
        for (std::size_t c = 0; c < 6; ++c) {
          p += bb[0][c] * z[c];
          v += bb[1][c] * z[c];
          a += bb[2][c] * z[c];
        }
        fleet_.trace.position(s, drone)[b.axis] = p;
        fleet_.trace.velocity(s, drone)[b.axis] = v;
        fleet_.accel(s, drone)[b.axis] = a;
      }
    }
    fleet_.trace.position(p_.grid.steps(), drone)[b.axis] = axis.back().p;
    fleet_.trace.velocity(p_.grid.steps(), drone)[b.axis] = axis.back().v;
    fleet_.accel(p_.grid.steps(), drone)[b.axis] = axis.back().a;
  }

  const Problem& p_;
  const PlannerConfig& cfg_;
  std::ptrdiff_t per_knot_;
  std::vector<BoundaryBasis> basis_;
  SampledFleet fleet_;
  std::vector<DroneKnots> knots_;
};

inline bool peaks_within(const std::vector<DroneKnots>& knots, double knot_period, const PlannerConfig& cfg) {
  for (const auto& d : knots)
    for (const auto& axis : d)
      for (std::size_t k = 0; k + 1 < axis.size(); ++k)
        if (!segment_feasible(solve_boundary(axis[k], axis[k + 1], knot_period), cfg.v_max, cfg.a_max).feasible)
          return false;
  return true;
}

}  // namespace detail

/// Dense samples of the whole fleet: free drones from their trajectories, fixed drones as given.
inline SampledFleet sample_fleet(const Problem& problem, const std::vector<DroneAxes>& trajectories) {
  SampledFleet fleet(problem.grid, problem.fleet_size);
  for (const auto& f : problem.fixed)
    for (std::ptrdiff_t k = 0; k < problem.grid.count(); ++k) {
      const auto i = static_cast<std::size_t>(k);
      fleet.trace.position(k, f.drone) = f.position[i];
      fleet.trace.velocity(k, f.drone) = f.velocity[i];
      fleet.accel(k, f.drone) = f.acceleration[i];
    }
  for (std::size_t s = 0; s < problem.free.size(); ++s) write_samples(trajectories[s], problem.free[s].drone, fleet);
  return fleet;
}

inline double min_pair_distance(const Trace& trace) {
  double best = std::numeric_limits<double>::infinity();
  for (std::ptrdiff_t k = 0; k < trace.sample_count(); ++k)
    for (std::size_t i = 0; i < trace.drone_count(); ++i)
      for (std::size_t h = i + 1; h < trace.drone_count(); ++h)
        best = std::min(best, (trace.position(k, i) - trace.position(k, h)).norm());
  return best;
}

inline ConstraintReport constraint_report(const std::vector<DroneAxes>& trajectories, const Trace& trace,
                                          const PlannerConfig& cfg) {
  ConstraintReport r;
  for (const auto& d : trajectories)
    for (const auto& axis : d) {
      for (const auto& k : axis.knots) {
        r.max_knot_velocity = std::max(r.max_knot_velocity, std::abs(k.v));
        r.max_knot_acceleration = std::max(r.max_knot_acceleration, std::abs(k.a));
      }
      for (const auto& seg : axis.segments) {
        const auto f = segment_feasible(seg, cfg.v_max, cfg.a_max);
        r.peak_velocity = std::max(r.peak_velocity, f.peak_v);
        r.peak_acceleration = std::max(r.peak_acceleration, f.peak_a);
        r.peak_jerk = std::max(r.peak_jerk, f.peak_jerk);
      }
    }
  r.min_pair_distance = min_pair_distance(trace);
  r.bounds_ok = r.peak_velocity <= cfg.v_max && r.peak_acceleration <= cfg.a_max &&
                r.max_knot_velocity <= cfg.v_max && r.max_knot_acceleration <= cfg.a_max;
  return r;
}

/// Builds a PlanResult (trajectories, robustness, energy, report) from knot states.
inline PlanResult make_result(const Problem& problem, const std::vector<DroneKnots>& knots, const PlannerConfig& cfg) {
  PlanResult r;
  for (std::size_t s = 0; s < problem.free.size(); ++s) {
    r.drones.push_back(problem.free[s].drone);
    DroneAxes axes;
    for (std::size_t j = 0; j < 3; ++j) axes[j] = propagate(knots[s][j], problem.knot_period);
    r.trajectories.push_back(std::move(axes));
  }
  const SampledFleet fleet = sample_fleet(problem, r.trajectories);
  for (std::size_t s = 0; s < problem.free.size(); ++s) {
    std::array<std::vector<double>, 3> slack;
    double energy = 0.0;
    for (std::ptrdiff_t k = 0; k < problem.grid.count(); ++k) {
      const Vec3& a = fleet.accel(k, problem.free[s].drone);
      energy += a.squaredNorm();
      for (std::size_t j = 0; j < 3; ++j) slack[j].push_back(std::abs(a[static_cast<Eigen::Index>(j)]));
    }
    r.energy_total.push_back(energy);
    r.energy_slack.push_back(std::move(slack));
  }
  r.exact_robustness = robustness(problem.formula, fleet.trace, 0);
  r.smooth_robustness = smooth_robustness(problem.formula, fleet.trace, 0, cfg.c);
  r.constraint_report = constraint_report(r.trajectories, fleet.trace, cfg);
  return r;
}

namespace detail {

inline PlanResult solve_impl(const Problem& problem, const PlannerConfig& cfg, double energy_weight) {
  if (!(cfg.c >= 1.0)) throw InvalidArgument("LSE scale c must be >= 1");
  if (!(cfg.v_max > 0.0) || !(cfg.a_max > 0.0)) throw InvalidArgument("bounds must be positive");
  if (!(energy_weight >= 0.0)) throw InvalidArgument("energy_weight must be non-negative");
  const int starts = std::max(1, cfg.multistart_count);
  AscentOptions opt;
  opt.max_iterations = cfg.max_iterations;
  opt.tolerance = cfg.tolerance;
  opt.memory = cfg.lbfgs_memory;

  std::vector<PlanResult> candidates;
  for (int start = 0; start < starts; ++start) {
    std::vector<DroneKnots> knots;
    for (const auto& f : problem.free) knots.push_back(f.guess);
    if (start > 0 && cfg.multistart_noise > 0.0) {
      std::seed_seq seq{static_cast<std::uint64_t>(cfg.rng_seed), static_cast<std::uint64_t>(start)};
      std::mt19937_64 rng(seq);
      std::uniform_real_distribution<double> noise(-cfg.multistart_noise, cfg.multistart_noise);
      for (std::size_t s = 0; s < knots.size(); ++s)
        for (auto& axis : knots[s])
          for (std::size_t k = 1; k <= problem.free_knots(s); ++k) axis[k].p += noise(rng);
    }

    KnotObjective objective(problem, cfg);
    objective.load(std::move(knots));
    int iterations = 0;
    bool hit_limit = false;
    std::vector<std::vector<double>> history;
    double weight = cfg.penalty_weight;
    for (int round = 0; round < std::max(1, cfg.penalty_rounds); ++round, weight *= 2.0) {
      hit_limit = false;
      for (const auto& group : problem.groups) {
        Eigen::VectorXd x;
        Eigen::VectorXd lo;
        Eigen::VectorXd hi;
        objective.pack(group, x, lo, hi);
        const auto fn = [&](const Eigen::VectorXd& xv, Eigen::VectorXd& g) {
          return objective(group, xv, g, weight, energy_weight);
        };
        const AscentReport rep = maximize(fn, x, lo, hi, opt);
        objective.unpack(group, x);
        iterations += rep.iterations;
        hit_limit = hit_limit || rep.stop == AscentStop::IterationLimit;
        history.push_back(rep.history);
      }
      if (peaks_within(objective.all_knots(), problem.knot_period, cfg)) break;
    }

    PlanResult r = make_result(problem, objective.all_knots(), cfg);
    r.iterations = iterations;
    r.objective_history = std::move(history);
    r.start_index = start;
    if (r.exact_robustness > 0.0 && r.constraint_report.bounds_ok)
      r.status = PlanStatus::Converged;
    else
      r.status = hit_limit ? PlanStatus::IterationLimit : PlanStatus::Infeasible;
    candidates.push_back(std::move(r));
  }

  // best: converged first, then exact robustness, lower energy, lower start index
  const auto better = [](const PlanResult& a, const PlanResult& b) {
    const bool ca = a.status == PlanStatus::Converged;
    const bool cb = b.status == PlanStatus::Converged;
    if (ca != cb) return ca;
    if (a.exact_robustness != b.exact_robustness) return a.exact_robustness > b.exact_robustness;
    double ea = 0.0;
    double eb = 0.0;
    for (double e : a.energy_total) ea += e;
    for (double e : b.energy_total) eb += e;
    if (ea != eb) return ea < eb;
    return a.start_index < b.start_index;
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i)
    if (better(candidates[i], candidates[best])) best = i;
  return std::move(candidates[best]);
}

}  // namespace detail

/// Maximizes the smooth robustness of the problem formula over the knot states.
inline PlanResult solve(const Problem& problem, const PlannerConfig& config) {
  return detail::solve_impl(problem, config, 0.0);
}

/// Same as solve with the energy term energy_weight·Σ_k ‖a(t_k)‖² subtracted from the objective. The slack
/// bound ε_k is active at any optimum, so it is eliminated and reported as |a(t_k)|.
inline PlanResult solve_energy_aware(const Problem& problem, const PlannerConfig& config) {
  return detail::solve_impl(problem, config, config.energy_weight);
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Violation {
  enum class Kind { Robustness, KnotVelocity, KnotAcceleration, SegmentVelocity, SegmentAcceleration,
                    SampleVelocity, SampleAcceleration, Distance };
  Kind kind = Kind::Robustness;
  /// Fleet index; for Distance the first drone of the pair.
  std::size_t drone = 0;
  std::size_t other = 0;
  int axis = -1;
  double time = 0.0;
  /// Trace sample index where applicable, otherwise -1.
  std::ptrdiff_t sample = -1;
  double value = 0.0;
  double bound = 0.0;
};

inline const char* to_string(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::Robustness:
      return "robustness";
    case Violation::Kind::KnotVelocity:
      return "knot-velocity";
    case Violation::Kind::KnotAcceleration:
      return "knot-acceleration";
    case Violation::Kind::SegmentVelocity:
      return "segment-velocity";
    case Violation::Kind::SegmentAcceleration:
      return "segment-acceleration";
    case Violation::Kind::SampleVelocity:
      return "sample-velocity";
    case Violation::Kind::SampleAcceleration:
      return "sample-acceleration";
    case Violation::Kind::Distance:
      return "distance";
  }
  return "?";
}

struct ValidationReport {
  double exact_robustness = 0.0;
  double min_pair_distance = std::numeric_limits<double>::infinity();
  std::vector<Violation> violations;

  [[nodiscard]] bool passed() const { return violations.empty(); }
};

/// Sample-level checks: exact robustness of `formula`, |v|, |a| per axis and pairwise distance.
inline ValidationReport validate_samples(const SampledFleet& fleet, const Formula& formula, double delta_min,
                                         const PlannerConfig& cfg) {
  ValidationReport rep;
  const Trace& tr = fleet.trace;
  const TimeGrid& grid = tr.grid();
  rep.exact_robustness = robustness(formula, tr, 0);
  if (!(rep.exact_robustness > 0.0)) {
    Violation v;
    v.kind = Violation::Kind::Robustness;
    v.value = rep.exact_robustness;
    rep.violations.push_back(v);
  }
  const std::size_t q = tr.drone_count();
  for (std::ptrdiff_t k = 0; k < tr.sample_count(); ++k) {
    for (std::size_t d = 0; d < q; ++d) {
      for (int j = 0; j < 3; ++j) {
        const double vel = tr.velocity(k, d)[j];
        const double acc = fleet.accel(k, d)[j];
        if (std::abs(vel) > cfg.v_max)
          rep.violations.push_back({Violation::Kind::SampleVelocity, d, d, j, grid.time(k),
                                    k * static_cast<std::ptrdiff_t>(q) + static_cast<std::ptrdiff_t>(d), vel,
                                    cfg.v_max});
        if (std::abs(acc) > cfg.a_max)
          rep.violations.push_back({Violation::Kind::SampleAcceleration, d, d, j, grid.time(k),
                                    k * static_cast<std::ptrdiff_t>(q) + static_cast<std::ptrdiff_t>(d), acc,
                                    cfg.a_max});
      }
      for (std::size_t h = d + 1; h < q; ++h) {
        const double dist = (tr.position(k, d) - tr.position(k, h)).norm();
        rep.min_pair_distance = std::min(rep.min_pair_distance, dist);
        if (dist < delta_min)
          rep.violations.push_back({Violation::Kind::Distance, d, h, -1, grid.time(k),
                                    k * static_cast<std::ptrdiff_t>(q) + static_cast<std::ptrdiff_t>(d), dist,
                                    delta_min});
      }
    }
  }
  return rep;
}

/// Re-checks a plan with exact semantics: robustness on the Ts-sampled trace, knot and intra-segment
/// bounds, and the pairwise distance at every sample.
inline ValidationReport exact_validate(const PlanResult& result, const Mission& mission, const PlannerConfig& cfg,
                                       UntilReading reading = UntilReading::Flattened) {
  Mission copy = mission;
  copy.planner.sample_period = cfg.sample_period;
  const Formula formula = build_formula(copy, assign_targets(mission), reading);
  const TimeGrid grid(cfg.sample_period, mission.horizon);
  SampledFleet fleet(grid, mission.drones.size());
  for (std::size_t s = 0; s < result.trajectories.size(); ++s) write_samples(result.trajectories[s], result.drones[s], fleet);
  ValidationReport rep = validate_samples(fleet, formula, mission.delta_min, cfg);
  for (std::size_t s = 0; s < result.trajectories.size(); ++s) {
    const std::size_t d = result.drones[s];
    for (int j = 0; j < 3; ++j) {
      const auto& axis = result.trajectories[s][static_cast<std::size_t>(j)];
      for (std::size_t k = 0; k < axis.knots.size(); ++k) {
        const double t = axis.knot_period * static_cast<double>(k);
        if (std::abs(axis.knots[k].v) > cfg.v_max)
          rep.violations.push_back({Violation::Kind::KnotVelocity, d, d, j, t, -1, axis.knots[k].v, cfg.v_max});
        if (std::abs(axis.knots[k].a) > cfg.a_max)
          rep.violations.push_back({Violation::Kind::KnotAcceleration, d, d, j, t, -1, axis.knots[k].a, cfg.a_max});
      }
      for (std::size_t k = 0; k < axis.segments.size(); ++k) {
        const auto f = segment_feasible(axis.segments[k], cfg.v_max, cfg.a_max);
        const double t = axis.knot_period * static_cast<double>(k);
        if (f.peak_v > cfg.v_max)
          rep.violations.push_back({Violation::Kind::SegmentVelocity, d, d, j, t, -1, f.peak_v, cfg.v_max});
        if (f.peak_a > cfg.a_max)
          rep.violations.push_back({Violation::Kind::SegmentAcceleration, d, d, j, t, -1, f.peak_a, cfg.a_max});
      }
    }
  }
  return rep;
}

}  // namespace stlplan
