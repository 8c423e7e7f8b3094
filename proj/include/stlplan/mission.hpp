#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "stlplan/config.hpp"
#include "stlplan/errors.hpp"
#include "stlplan/formula.hpp"
#include "stlplan/geometry.hpp"
#include "stlplan/trace.hpp"

namespace stlplan {

struct DroneSpec {
  int id = 1;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
  /// Heading per assigned target in radians; carried through untouched.
  std::vector<double> heading_per_target;
  Region home;

  friend bool operator==(const DroneSpec&, const DroneSpec&) = default;
};

/// Home region used when a drone does not name one: 1 m cube centred at its start.
inline Region default_home(int id, const Vec3& position) {
  return Region("home_" + std::to_string(id), Box{position - Vec3::Constant(0.5), position + Vec3::Constant(0.5)});
}

inline Region default_workspace() {
  return Region("workspace", Box{Vec3(-7.0, -9.0, 0.0), Vec3(7.0, 9.0, 23.0)});
}

struct Mission {
  Region workspace = default_workspace();
  std::vector<Region> obstacles;
  std::vector<Region> targets;
  /// Ordered by id.
  std::vector<DroneSpec> drones;
  double delta_min = 3.0;
  int cluster_count = 1;
  double horizon = 60.0;
  /// End of the target visit window; 2T/3 when absent.
  std::optional<double> visit_deadline;
  PlannerConfig planner;
  ReplannerSettings replanner;

  [[nodiscard]] double deadline() const { return visit_deadline.value_or(2.0 * horizon / 3.0); }

  [[nodiscard]] std::size_t drone_index(int id) const {
    for (std::size_t i = 0; i < drones.size(); ++i)
      if (drones[i].id == id) return i;
    throw InvalidArgument("unknown drone id " + std::to_string(id));
  }

  friend bool operator==(const Mission&, const Mission&) = default;
};

/// Checks every mission invariant; the message names the offending field.
inline void validate_mission(const Mission& m) {
  if (m.drones.empty()) throw ValidationError("drones: at least one drone is required");
  if (!(m.delta_min > 0.0)) throw ValidationError("delta_min: must be positive");
  if (m.cluster_count < 1 || static_cast<std::size_t>(m.cluster_count) > m.drones.size())
    throw ValidationError("cluster_count: must lie in [1, number of drones]");
  if (!(m.horizon > 0.0)) throw ValidationError("horizon: must be positive");
  const double d = m.deadline();
  if (!(d >= 0.0 && d <= m.horizon)) throw ValidationError("visit_deadline: must lie in [0, horizon]");
  if (m.targets.empty()) throw ValidationError("targets: at least one target is required");
  for (std::size_t i = 0; i < m.drones.size(); ++i) {
    const auto& dr = m.drones[i];
    const std::string path = "drones[" + std::to_string(i) + "]";
    if (i > 0 && !(m.drones[i - 1].id < dr.id)) throw ValidationError(path + ".id: ids must be unique and ascending");
    if (!dr.position.allFinite() || !dr.velocity.allFinite() || !dr.acceleration.allFinite())
      throw ValidationError(path + ".initial: non-finite state");
    if (!m.workspace.contains(dr.position))
      throw ValidationError(path + ".initial.position: drone " + std::to_string(dr.id) + " starts outside the workspace");
  }
  for (std::size_t t = 0; t < m.targets.size(); ++t) {
    const auto& tg = m.targets[t];
    if (!region_within(tg, m.workspace))
      throw ValidationError("targets[" + std::to_string(t) + "]: target '" + tg.name() + "' lies outside the workspace");
    for (const auto& ob : m.obstacles)
      if (regions_overlap(tg, ob))
        throw ValidationError("targets[" + std::to_string(t) + "]: target '" + tg.name() + "' intersects obstacle '" +
                              ob.name() + "'");
  }
  const auto& trig = m.replanner.trigger;
  if (!(trig.eta > 0.0)) throw ValidationError("replanner.eta: must be positive");
  const auto multiple = [](double x, double unit) {
    const double r = x / unit;
    return unit > 0.0 && r >= 1.0 - 1e-9 && std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r);
  };
  if (!multiple(trig.event_period, m.planner.sample_period))
    throw ValidationError("replanner.event_period: must be a positive multiple of planner.sample_period");
  if (!multiple(trig.topic_period, trig.event_period))
    throw ValidationError("replanner.topic_period: must be a positive multiple of replanner.event_period");
  for (std::size_t i = 0; i < m.replanner.disturbances.size(); ++i) {
    const auto& dist = m.replanner.disturbances[i];
    const std::string path = "replanner.disturbances[" + std::to_string(i) + "]";
    if (std::none_of(m.drones.begin(), m.drones.end(), [&](const DroneSpec& d) { return d.id == dist.drone; }))
      throw ValidationError(path + ".drone: unknown drone id " + std::to_string(dist.drone));
    if (!(dist.onset >= 0.0 && dist.onset <= m.horizon))
      throw ValidationError(path + ".onset: outside the horizon");
    if (!dist.offset.allFinite()) throw ValidationError(path + ".offset: non-finite");
    if (!(dist.decay >= 0.0)) throw ValidationError(path + ".decay: must be non-negative");
  }
}

/// Drone index -> ordered target indices.
struct TargetAssignment {
  std::vector<std::vector<std::size_t>> targets_of;

  friend bool operator==(const TargetAssignment&, const TargetAssignment&) = default;
};

/// Round-robin: drone k (1-based, by id) receives targets k, k+q, k+2q, ...
inline TargetAssignment assign_targets(const Mission& m) {
  TargetAssignment a;
  a.targets_of.resize(m.drones.size());
  for (std::size_t t = 0; t < m.targets.size(); ++t) a.targets_of[t % m.drones.size()].push_back(t);
  return a;
}

enum class UntilReading {
  /// Targets as Eventually[0, D] conjuncts, home as Eventually[D, T].
  Flattened,
  /// (all targets) U[D, T] (all homes), evaluated at 0.
  Strict,
};

/// A reach-this-region requirement of one drone.
struct Goal {
  Region region;
  Interval window;
  bool home = false;
};

inline std::vector<Goal> drone_goals(const Mission& m, const TargetAssignment& a, std::size_t drone) {
  std::vector<Goal> out;
  for (std::size_t t : a.targets_of.at(drone)) out.push_back({m.targets[t], {0.0, m.deadline()}, false});
  out.push_back({m.drones[drone].home, {m.deadline(), m.horizon}, true});
  return out;
}

/// Safety part of the mission: pairwise distance, workspace and obstacle avoidance over `window`.
inline std::vector<Formula> safety_conjuncts(const Mission& m, Interval window) {
  std::vector<Formula> out;
  const std::size_t q = m.drones.size();
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t h = i + 1; h < q; ++h) out.push_back(always(window, pred(PairDistance{i, h, m.delta_min})));
  for (std::size_t i = 0; i < q; ++i) {
    out.push_back(always(window, pred(InsideRegion{i, Channel::Position, m.workspace})));
    for (const auto& ob : m.obstacles) out.push_back(always(window, pred(OutsideRegion{i, ob})));
  }
  return out;
}

/// Mission formula over [0, T]. Throws Misalignment when the visit deadline is off the sampling grid.
inline Formula build_formula(const Mission& m, const TargetAssignment& a,
                             UntilReading reading = UntilReading::Flattened) {
  const TimeGrid grid(m.planner.sample_period, m.horizon);
  (void)grid.index_of(m.deadline());
  std::vector<Formula> parts = safety_conjuncts(m, {0.0, m.horizon});
  const std::size_t q = m.drones.size();
  if (reading == UntilReading::Flattened) {
    for (std::size_t i = 0; i < q; ++i)
      for (const auto& g : drone_goals(m, a, i))
        parts.push_back(eventually(g.window, pred(InsideRegion{i, Channel::Position, g.region})));
  } else {
    std::vector<Formula> tgt;
    std::vector<Formula> home;
    for (std::size_t i = 0; i < q; ++i) {
      for (std::size_t t : a.targets_of[i])
        tgt.push_back(pred(InsideRegion{i, Channel::Position, m.targets[t]}));
      home.push_back(pred(InsideRegion{i, Channel::Position, m.drones[i].home}));
    }
    parts.push_back(until({m.deadline(), m.horizon}, conj(std::move(tgt)), conj(std::move(home))));
  }
  return conj(std::move(parts));
}

}  // namespace stlplan
