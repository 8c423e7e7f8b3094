#pragma once

#include <cstdint>
#include <vector>

#include "stlplan/geometry.hpp"

namespace stlplan {

/// Planner parameters. Defaults follow the basic power-tower run (c = 5, Ts = 0.05 s, 3 m/s, 3 m/s²).
struct PlannerConfig {
  double c = 5.0;
  double sample_period = 0.05;
  double knot_period = 1.0;
  double v_max = 3.0;
  double a_max = 3.0;
  int max_iterations = 500;
  double tolerance = 1e-6;
  int multistart_count = 3;
  std::uint64_t rng_seed = 0;
  /// Scale of Q = energy_weight · I in the energy-aware objective.
  double energy_weight = 0.0;
  bool decouple_axes = false;
  /// Uniform knot-position noise for starts after the first.
  double multistart_noise = 0.1;
  /// Quadratic penalty on intra-segment peaks: initial weight, doubling rounds and the
  /// fraction of each bound kept as margin.
  double penalty_weight = 10.0;
  int penalty_rounds = 5;
  double penalty_margin = 0.02;
  int lbfgs_memory = 8;

  friend bool operator==(const PlannerConfig&, const PlannerConfig&) = default;
};

/// Runtime offset p(t) += offset · exp(-decay (t - onset)) for t >= onset.
struct Disturbance {
  /// Drone id (not index).
  int drone = 0;
  double onset = 0.0;
  Vec3 offset = Vec3::Zero();
  double decay = 0.0;

  friend bool operator==(const Disturbance&, const Disturbance&) = default;
};

struct TriggerConfig {
  double eta = 1.0;
  double event_period = 0.5;
  double topic_period = 5.0;

  friend bool operator==(const TriggerConfig&, const TriggerConfig&) = default;
};

struct ReplannerSettings {
  TriggerConfig trigger;
  std::vector<Disturbance> disturbances;

  friend bool operator==(const ReplannerSettings&, const ReplannerSettings&) = default;
};

}  // namespace stlplan
