#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include "stlplan/errors.hpp"
#include "stlplan/mission.hpp"
#include "stlplan/planner.hpp"

namespace stlplan {

/// Offset added by the disturbances of one drone at time t: (position, velocity, acceleration).
/// Only disturbances with onset in (after, t] contribute.
struct Offset {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
  bool any = false;
};

inline Offset disturbance_offset(const std::vector<Disturbance>& ds, int drone_id, double t,
                                 double after = -std::numeric_limits<double>::infinity()) {
  Offset o;
  for (const auto& d : ds) {
    if (d.drone != drone_id || !(d.onset <= t) || !(d.onset > after)) continue;
    const double e = std::exp(-d.decay * (t - d.onset));
    o.p += d.offset * e;
    o.v -= d.decay * d.offset * e;
    o.a += d.decay * d.decay * d.offset * e;
    o.any = true;
  }
  return o;
}

/// Runtime samples: planned + Σ offset·exp(-decay (t - onset)) for t >= onset, with the matching
/// derivatives added to velocity and acceleration.
inline SampledFleet apply_disturbances(const SampledFleet& planned, const Mission& mission,
                                       const std::vector<Disturbance>& disturbances) {
  SampledFleet out = planned;
  const TimeGrid& grid = planned.trace.grid();
  for (std::size_t d = 0; d < planned.trace.drone_count(); ++d)
    for (std::ptrdiff_t k = 0; k < grid.count(); ++k) {
      const Offset o = disturbance_offset(disturbances, mission.drones[d].id, grid.time(k));
      if (!o.any) continue;
      out.trace.position(k, d) += o.p;
      out.trace.velocity(k, d) += o.v;
      out.accel(k, d) += o.a;
    }
  return out;
}

struct TriggerEvent {
  int drone = 0;
  double time = 0.0;
  Vec3 runtime_position = Vec3::Zero();
  Vec3 planned_position = Vec3::Zero();
  double deviation = 0.0;

  friend bool operator==(const TriggerEvent&, const TriggerEvent&) = default;
};

namespace detail {

inline std::ptrdiff_t period_steps(double period, double sample_period, const char* what) {
  const double r = period / sample_period;
  const double n = std::round(r);
  if (!(n >= 1.0) || std::abs(r - n) > 1e-9 * std::max(1.0, r))
    throw Misalignment(std::string(what) + " is not a positive multiple of the sampling period");
  return static_cast<std::ptrdiff_t>(n);
}

}  // namespace detail

/// Every event instant l·T_e at which the runtime position is farther than eta from the reference.
inline std::vector<TriggerEvent> monitor(const SampledFleet& runtime, const SampledFleet& reference,
                                         const Mission& mission, const TriggerConfig& config) {
  const TimeGrid& grid = runtime.trace.grid();
  if (!(grid == reference.trace.grid()) || runtime.trace.drone_count() != reference.trace.drone_count())
    throw Misalignment("runtime and reference traces are on different grids");
  if (!(config.eta > 0.0)) throw InvalidArgument("eta must be positive");
  const std::ptrdiff_t me = detail::period_steps(config.event_period, grid.sample_period(), "event_period");
  std::vector<TriggerEvent> out;
  for (std::ptrdiff_t k = 0; k < grid.count(); k += me)
    for (std::size_t d = 0; d < runtime.trace.drone_count(); ++d) {
      const Vec3& p = runtime.trace.position(k, d);
      const Vec3& r = reference.trace.position(k, d);
      const double dev = (p - r).norm();
      if (dev > config.eta) out.push_back({mission.drones[d].id, grid.time(k), p, r, dev});
    }
  return out;
}

/// Position, velocity and acceleration of one drone at one instant.
struct DroneState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
};

inline DroneState state_at(const SampledFleet& f, std::ptrdiff_t k, std::size_t d) {
  return {f.trace.position(k, d), f.trace.velocity(k, d), f.accel(k, d)};
}

struct ReplanResult {
  int drone = 0;
  /// [t̄_l, t̂_{g+1}] in mission time.
  Interval window;
  /// Trajectories on window-local time (0 at window.lower).
  PlanResult segment;
  double solve_seconds = 0.0;
  /// True when the blended initial guess already satisfied every check and no ascent ran.
  bool guess_accepted = false;
};

/// Safety formula for one drone over [0, duration]: distance to every other drone, workspace, obstacles.
inline Formula window_safety_formula(const Mission& m, std::size_t drone, double duration) {
  const Interval w{0.0, duration};
  std::vector<Formula> parts;
  for (std::size_t h = 0; h < m.drones.size(); ++h)
    if (h != drone) parts.push_back(always(w, pred(PairDistance{drone, h, m.delta_min})));
  parts.push_back(always(w, pred(InsideRegion{drone, Channel::Position, m.workspace})));
  for (const auto& ob : m.obstacles) parts.push_back(always(w, pred(OutsideRegion{drone, ob})));
  return conj(std::move(parts));
}

/// Replans drone `drone` over reference samples [k0, k1]: start fixed at `current`, terminal knot fixed
/// to the reference state at k1, other drones following the reference. The knot period is the
/// configured one adjusted so that it divides the window.
inline ReplanResult replan_segment(const DroneState& current, const SampledFleet& reference, const Mission& mission,
                                   std::size_t drone, std::ptrdiff_t k0, std::ptrdiff_t k1,
                                   const PlannerConfig& cfg) {
  const auto clock_start = std::chrono::steady_clock::now();
  const TimeGrid& full = reference.trace.grid();
  if (!(k0 >= 0 && k1 > k0 && k1 <= full.steps())) throw InvalidArgument("replan window is empty or off the grid");
  const std::ptrdiff_t samples = k1 - k0;
  const std::ptrdiff_t per_knot = detail::period_steps(cfg.knot_period, full.sample_period(), "knot_period");
  // segment count near window / knot_period that divides the sample count
  const auto target = std::max<std::ptrdiff_t>(1, static_cast<std::ptrdiff_t>(
                                                      std::llround(static_cast<double>(samples) / per_knot)));
  std::ptrdiff_t n = 1;
  for (std::ptrdiff_t c = 1; c <= samples; ++c)
    if (samples % c == 0 && std::abs(c - target) < std::abs(n - target)) n = c;
  const std::ptrdiff_t step = samples / n;
  const double h = full.sample_period() * static_cast<double>(step);
  const TimeGrid grid = TimeGrid::from_steps(full.sample_period(), samples);

  const DroneState start_ref = state_at(reference, k0, drone);
  const Vec3 dp = current.p - start_ref.p;
  DroneKnots guess;
  for (int j = 0; j < 3; ++j) {
    auto& axis = guess[static_cast<std::size_t>(j)];
    for (std::ptrdiff_t i = 0; i <= n; ++i) {
      const DroneState r = state_at(reference, k0 + i * step, drone);
      const double blend = 1.0 - static_cast<double>(i) / static_cast<double>(n);
      axis.push_back({r.p[j] + blend * dp[j], std::clamp(r.v[j], -cfg.v_max, cfg.v_max),
                      std::clamp(r.a[j], -cfg.a_max, cfg.a_max)});
    }
    axis.front() = {current.p[j], current.v[j], current.a[j]};
    const DroneState end = state_at(reference, k1, drone);
    axis.back() = {end.p[j], end.v[j], end.a[j]};
  }

  std::vector<FixedDrone> fixed;
  for (std::size_t o = 0; o < reference.trace.drone_count(); ++o) {
    if (o == drone) continue;
    FixedDrone f{o, {}, {}, {}};
    for (std::ptrdiff_t k = k0; k <= k1; ++k) {
      f.position.push_back(reference.trace.position(k, o));
      f.velocity.push_back(reference.trace.velocity(k, o));
      f.acceleration.push_back(reference.accel(k, o));
    }
    fixed.push_back(std::move(f));
  }
  const Problem problem =
      make_problem(window_safety_formula(mission, drone, grid.horizon()), grid, h, reference.trace.drone_count(),
                   {FreeDrone{drone, guess, true}}, std::move(fixed), false);

  ReplanResult out;
  out.drone = mission.drones[drone].id;
  out.window = {full.time(k0), full.time(k1)};
  PlanResult first = make_result(problem, {guess}, cfg);
  if (first.exact_robustness > 0.0 && first.constraint_report.bounds_ok) {
    first.status = PlanStatus::Converged;
    out.segment = std::move(first);
    out.guess_accepted = true;
  } else {
    out.segment = solve(problem, cfg);
  }
  out.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  return out;
}

struct ExecutionLog {
  SampledFleet executed;
  std::vector<TriggerEvent> triggers;
  std::vector<ReplanResult> replans;
  /// Exact robustness of the mission formula on the executed trace.
  double executed_robustness = 0.0;

  [[nodiscard]] bool all_converged() const {
    for (const auto& r : replans)
      if (r.segment.status != PlanStatus::Converged) return false;
    return true;
  }
};

/// Closed loop of disturbance injection, event checks and reconnection replans. A replan starting at
/// t̄ absorbs that drone's disturbances with onset <= t̄: the drone then follows the new segment, which
/// starts from the disturbed state. The window ends at the first topic instant at least two knot periods
/// after t̄ (or at the horizon).
inline ExecutionLog simulate_mission(const PlanResult& plan, const Mission& mission, const PlannerConfig& cfg,
                                     const ReplannerSettings& settings, UntilReading reading = UntilReading::Flattened) {
  const TimeGrid grid(cfg.sample_period, mission.horizon);
  const std::size_t q = mission.drones.size();
  if (plan.trajectories.size() != q) throw InvalidArgument("plan does not cover every drone");
  if (!(settings.trigger.eta > 0.0)) throw InvalidArgument("eta must be positive");
  const std::ptrdiff_t me = detail::period_steps(settings.trigger.event_period, grid.sample_period(), "event_period");
  const std::ptrdiff_t mg = detail::period_steps(settings.trigger.topic_period, grid.sample_period(), "topic_period");
  if (mg % me != 0) throw Misalignment("topic_period is not a multiple of event_period");
  const std::ptrdiff_t per_knot = detail::period_steps(cfg.knot_period, grid.sample_period(), "knot_period");

  SampledFleet reference(grid, q);
  for (std::size_t s = 0; s < q; ++s) write_samples(plan.trajectories[s], plan.drones[s], reference);

  std::vector<double> absorbed(q, -std::numeric_limits<double>::infinity());
  ExecutionLog log;
  log.executed = reference;
  const auto refresh = [&](std::size_t d, std::ptrdiff_t from) {
    for (std::ptrdiff_t k = from; k < grid.count(); ++k) {
      const Offset o = disturbance_offset(settings.disturbances, mission.drones[d].id, grid.time(k), absorbed[d]);
      log.executed.trace.position(k, d) = reference.trace.position(k, d);
      log.executed.trace.velocity(k, d) = reference.trace.velocity(k, d);
      log.executed.accel(k, d) = reference.accel(k, d);
      if (!o.any) continue;
      log.executed.trace.position(k, d) += o.p;
      log.executed.trace.velocity(k, d) += o.v;
      log.executed.accel(k, d) += o.a;
    }
  };
  for (std::size_t d = 0; d < q; ++d) refresh(d, 0);

  for (std::ptrdiff_t k = 0; k < grid.steps(); k += me) {
    for (std::size_t d = 0; d < q; ++d) {
      const Vec3& p = log.executed.trace.position(k, d);
      const Vec3& r = reference.trace.position(k, d);
      const double dev = (p - r).norm();
      if (!(dev > settings.trigger.eta)) continue;
      log.triggers.push_back({mission.drones[d].id, grid.time(k), p, r, dev});

      std::ptrdiff_t k1 = ((k + 2 * per_knot + mg - 1) / mg) * mg;
      if (k1 <= k) k1 += mg;
      k1 = std::min(k1, grid.steps());
      ReplanResult rp = replan_segment(state_at(log.executed, k, d), reference, mission, d, k, k1, cfg);

      SampledFleet seg(TimeGrid::from_steps(grid.sample_period(), k1 - k), q);
      write_samples(rp.segment.trajectories.front(), d, seg);
      for (std::ptrdiff_t i = 0; i <= k1 - k; ++i) {
        reference.trace.position(k + i, d) = seg.trace.position(i, d);
        reference.trace.velocity(k + i, d) = seg.trace.velocity(i, d);
        reference.accel(k + i, d) = seg.accel(i, d);
      }
      absorbed[d] = grid.time(k);
      refresh(d, k);
      log.replans.push_back(std::move(rp));
    }
  }

  Mission copy = mission;
  copy.planner.sample_period = cfg.sample_period;
  log.executed_robustness = robustness(build_formula(copy, assign_targets(mission), reading), log.executed.trace, 0);
  return log;
}

}  // namespace stlplan
