#pragma once

#include <exception>
#include <filesystem>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "stlplan/errors.hpp"
#include "stlplan/file_io.hpp"
#include "stlplan/mission.hpp"
#include "stlplan/planner.hpp"
#include "stlplan/replanner.hpp"
#include "stlplan/scenario_io.hpp"
#include "stlplan/trace_io.hpp"

namespace stlplan::cli {

enum ExitCode : int { Ok = 0, InputError = 1, NotSatisfied = 2 };

/// Per-sample goal progress of one drone: over the goals whose window has opened, the minimum of the
/// best inside-margin reached so far within the window. At t = T this is the exact robustness of the
/// drone's reach conjuncts.
inline std::vector<double> goal_progress(const Trace& trace, const Mission& m, const TargetAssignment& a,
                                         std::size_t drone) {
  const TimeGrid& grid = trace.grid();
  const auto goals = drone_goals(m, a, drone);
  std::vector<double> best(goals.size(), -std::numeric_limits<double>::infinity());
  std::vector<IndexRange> ranges;
  for (const auto& g : goals) ranges.push_back(interval_to_indices(g.window, grid));
  std::vector<double> out;
  for (std::ptrdiff_t k = 0; k < grid.count(); ++k) {
    double v = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < goals.size(); ++i) {
      if (k < ranges[i].first) continue;
      if (k <= ranges[i].last) best[i] = std::max(best[i], goals[i].region.inside_margin(trace.position(k, drone)));
      v = std::min(v, best[i]);
    }
    out.push_back(v);
  }
  return out;
}

inline std::string profile_header(const Mission& m) {
  std::string h = "t";
  for (const auto& d : m.drones) h += ",drone_" + std::to_string(d.id);
  return h + "\n";
}

inline std::string robustness_csv(const SampledFleet& fleet, const Mission& m) {
  const auto a = assign_targets(m);
  std::vector<std::vector<double>> cols;
  for (std::size_t d = 0; d < m.drones.size(); ++d) cols.push_back(goal_progress(fleet.trace, m, a, d));
  std::string out = profile_header(m);
  for (std::ptrdiff_t k = 0; k < fleet.trace.sample_count(); ++k) {
    out += format_number(fleet.trace.grid().time(k));
    for (const auto& c : cols) out += "," + format_number(c[static_cast<std::size_t>(k)]);
    out += "\n";
  }
  return out;
}

/// Cumulative Σ‖a‖² over samples; the last row equals energy_total.
inline std::string energy_csv(const SampledFleet& fleet, const Mission& m) {
  std::vector<double> acc(m.drones.size(), 0.0);
  std::string out = profile_header(m);
  for (std::ptrdiff_t k = 0; k < fleet.trace.sample_count(); ++k) {
    out += format_number(fleet.trace.grid().time(k));
    for (std::size_t d = 0; d < acc.size(); ++d) {
      acc[d] += fleet.accel(k, d).squaredNorm();
      out += "," + format_number(acc[d]);
    }
    out += "\n";
  }
  return out;
}

inline std::vector<int> drone_ids(const Mission& m) {
  std::vector<int> ids;
  for (const auto& d : m.drones) ids.push_back(d.id);
  return ids;
}

inline Json knots_json(const DroneAxes& axes) {
  Json j;
  const char* names[3] = {"x", "y", "z"};
  for (std::size_t a = 0; a < 3; ++a) {
    Json rows = Json::array();
    for (const auto& k : axes[a].knots) rows.push_back({k.p, k.v, k.a});
    j[names[a]] = rows;
  }
  return j;
}

inline DroneAxes knots_from_json(const Json& j, double knot_period, const std::string& path) {
  namespace s = detail::scenario;
  s::keys(j, path, {"x", "y", "z"});
  DroneAxes axes;
  const char* names[3] = {"x", "y", "z"};
  for (std::size_t a = 0; a < 3; ++a) {
    const std::string ap = path + "." + names[a];
    const Json& rows = s::required(j, path, names[a]);
    if (!rows.is_array() || rows.size() < 2) s::fail(ap, "expected at least two knots");
    std::vector<AxisState> ks;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const Vec3 v = s::vec3(rows[k], ap + "[" + std::to_string(k) + "]");
      ks.push_back({v[0], v[1], v[2]});
    }
    axes[a] = propagate(ks, knot_period);
  }
  return axes;
}

inline Json constraint_json(const ConstraintReport& r) {
  Json j = {{"max_knot_velocity", r.max_knot_velocity},
            {"max_knot_acceleration", r.max_knot_acceleration},
            {"peak_velocity", r.peak_velocity},
            {"peak_acceleration", r.peak_acceleration},
            {"peak_jerk", r.peak_jerk},
            {"bounds_ok", r.bounds_ok}};
  j["min_pair_distance"] = std::isfinite(r.min_pair_distance) ? Json(r.min_pair_distance) : Json(nullptr);
  return j;
}

/// Plan metadata; deterministic for a fixed scenario and seed (no timings).
inline Json result_json(const PlanResult& r, const Mission& m, const PlannerConfig& cfg, bool energy_aware,
                        UntilReading reading, const FormulaShape& shape) {
  Json j;
  j["status"] = to_string(r.status);
  j["exact_robustness"] = r.exact_robustness;
  j["smooth_robustness"] = r.smooth_robustness;
  j["smooth_gap_bound"] = shape.depth * std::log(static_cast<double>(shape.arity)) / cfg.c;
  j["iterations"] = r.iterations;
  j["start_index"] = r.start_index;
  j["energy_aware"] = energy_aware;
  j["energy_weight"] = energy_aware ? cfg.energy_weight : 0.0;
  j["until_reading"] = reading == UntilReading::Strict ? "strict" : "flattened";
  j["rng_seed"] = cfg.rng_seed;
  j["sample_period"] = cfg.sample_period;
  j["knot_period"] = cfg.knot_period;
  j["horizon"] = m.horizon;
  j["constraint_report"] = constraint_json(r.constraint_report);
  Json drones = Json::array();
  for (std::size_t s = 0; s < r.trajectories.size(); ++s) {
    Json d;
    d["id"] = m.drones[r.drones[s]].id;
    d["energy_total"] = r.energy_total[s];
    d["knots"] = knots_json(r.trajectories[s]);
    drones.push_back(d);
  }
  j["drones"] = drones;
  if (!r.objective_history.empty() && !r.objective_history.back().empty())
    j["final_objective"] = r.objective_history.back().back();
  return j;
}

/// Rebuilds the trajectories of a plan from result.json for `m`.
inline PlanResult plan_from_json(const Json& j, const Mission& m, const PlannerConfig& cfg) {
  namespace s = detail::scenario;
  if (!j.is_object()) s::fail("result", "expected an object");
  const double kp = s::number(s::required(j, "result", "knot_period"), "result.knot_period");
  const double ts = s::number(s::required(j, "result", "sample_period"), "result.sample_period");
  const double horizon = s::number(s::required(j, "result", "horizon"), "result.horizon");
  if (ts != cfg.sample_period || horizon != m.horizon)
    s::fail("result", "plan grid does not match the scenario (sample_period/horizon)");
  const Json& ds = s::required(j, "result", "drones");
  if (!ds.is_array() || ds.size() != m.drones.size()) s::fail("result.drones", "expected one entry per drone");
  PlanResult r;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const std::string p = "result.drones[" + std::to_string(i) + "]";
    if (!ds[i].is_object()) s::fail(p, "expected an object");
    if (s::integer(s::required(ds[i], p, "id"), p + ".id") != m.drones[i].id) s::fail(p + ".id", "does not match");
    r.drones.push_back(i);
    r.trajectories.push_back(knots_from_json(s::required(ds[i], p, "knots"), kp, p + ".knots"));
    if (std::abs(r.trajectories.back()[0].horizon() - m.horizon) > 1e-9 * m.horizon)
      s::fail(p + ".knots", "trajectory horizon does not match the scenario");
  }
  return r;
}

inline SampledFleet sample_plan(const PlanResult& r, const Mission& m, const PlannerConfig& cfg) {
  SampledFleet fleet(TimeGrid(cfg.sample_period, m.horizon), m.drones.size());
  for (std::size_t s = 0; s < r.trajectories.size(); ++s) write_samples(r.trajectories[s], r.drones[s], fleet);
  return fleet;
}

struct PlanOptions {
  std::filesystem::path scenario;
  std::filesystem::path out;
  bool energy = false;
  std::optional<std::uint64_t> seed;
  std::optional<double> energy_weight;
  bool strict_until = false;
};

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const NumericalFailure& e) {
    err << "error: " << e.what() << "\n";
    return NotSatisfied;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return InputError;
  }
}

/// Plans a scenario and writes trace.csv, robustness.csv, energy.csv and result.json into `out`.
inline int cmd_plan(const PlanOptions& o, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const Mission m = load_scenario(o.scenario);
    PlannerConfig cfg = m.planner;
    if (o.seed) cfg.rng_seed = *o.seed;
    if (o.energy_weight) {
      if (!(*o.energy_weight >= 0.0)) throw InvalidArgument("--energy-weight must be non-negative");
      cfg.energy_weight = *o.energy_weight;
    }
    const UntilReading reading = o.strict_until ? UntilReading::Strict : UntilReading::Flattened;
    const Problem problem = build_problem(m, cfg, reading);
    const PlanResult r = o.energy ? solve_energy_aware(problem, cfg) : solve(problem, cfg);
    const SampledFleet fleet = sample_plan(r, m, cfg);

    std::filesystem::create_directories(o.out);
    write_file_atomic(o.out / "trace.csv", write_trace_csv(trace_rows(fleet, drone_ids(m))));
    write_file_atomic(o.out / "robustness.csv", robustness_csv(fleet, m));
    write_file_atomic(o.out / "energy.csv", energy_csv(fleet, m));
    write_file_atomic(o.out / "result.json",
                      result_json(r, m, cfg, o.energy, reading, formula_shape(problem.formula, problem.grid)).dump(2) +
                          "\n");
    log << "status " << to_string(r.status) << ", exact robustness " << format_number(r.exact_robustness)
        << ", smooth robustness " << format_number(r.smooth_robustness) << ", iterations " << r.iterations << "\n";
    if (r.status != PlanStatus::Converged) {
      err << "plan not satisfied: " << to_string(r.status) << " (exact robustness "
          << format_number(r.exact_robustness) << ")\n";
      return int{NotSatisfied};
    }
    return int{Ok};
  });
}

struct SimulateOptions {
  std::filesystem::path scenario;
  std::filesystem::path plan;
  std::filesystem::path out;
  bool strict_until = false;
};

inline std::string triggers_csv(const std::vector<TriggerEvent>& ts) {
  std::string out = "t,drone,px,py,pz,plan_px,plan_py,plan_pz,deviation\n";
  for (const auto& e : ts) {
    out += format_number(e.time) + "," + std::to_string(e.drone);
    for (int j = 0; j < 3; ++j) out += "," + format_number(e.runtime_position[j]);
    for (int j = 0; j < 3; ++j) out += "," + format_number(e.planned_position[j]);
    out += "," + format_number(e.deviation) + "\n";
  }
  return out;
}

inline Json replans_json(const ExecutionLog& log, const SampledFleet& plan) {
  Json j;
  j["executed_robustness"] = log.executed_robustness;
  j["trigger_count"] = log.triggers.size();
  Json rs = Json::array();
  for (const auto& r : log.replans) {
    const auto& seg = r.segment;
    const auto& axes = seg.trajectories.front();
    const auto k1 = plan.trace.grid().index_of(r.window.upper);
    const std::size_t d = seg.drones.front();
    Vec3 end;
    for (int a = 0; a < 3; ++a) end[a] = axes[static_cast<std::size_t>(a)].knots.back().p;
    Json e;
    e["drone"] = r.drone;
    e["window"] = {r.window.lower, r.window.upper};
    e["status"] = to_string(seg.status);
    e["window_robustness"] = seg.exact_robustness;
    e["guess_accepted"] = r.guess_accepted;
    e["terminal_error"] = (end - plan.trace.position(k1, d)).norm();
    e["solve_seconds"] = r.solve_seconds;
    e["knot_period"] = axes[0].knot_period;
    e["constraint_report"] = constraint_json(seg.constraint_report);
    e["knots"] = knots_json(axes);
    rs.push_back(e);
  }
  j["replans"] = rs;
  return j;
}

/// Replays a plan under the scenario's disturbances; writes executed_trace.csv, triggers.csv, replans.json.
inline int cmd_simulate(const SimulateOptions& o, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const Mission m = load_scenario(o.scenario);
    const PlannerConfig cfg = m.planner;
    Json pj;
    try {
      pj = Json::parse(read_file(o.plan / "result.json"));
    } catch (const Json::parse_error& e) {
      throw ParseError(std::string("result.json: malformed document: ") + e.what());
    }
    const PlanResult plan = plan_from_json(pj, m, cfg);
    const UntilReading reading = o.strict_until ? UntilReading::Strict : UntilReading::Flattened;
    const ExecutionLog ex = simulate_mission(plan, m, cfg, m.replanner, reading);
    const SampledFleet planned = sample_plan(plan, m, cfg);

    std::filesystem::create_directories(o.out);
    write_file_atomic(o.out / "executed_trace.csv", write_trace_csv(trace_rows(ex.executed, drone_ids(m))));
    write_file_atomic(o.out / "triggers.csv", triggers_csv(ex.triggers));
    write_file_atomic(o.out / "replans.json", replans_json(ex, planned).dump(2) + "\n");
    log << ex.triggers.size() << " trigger(s), " << ex.replans.size() << " replan(s), executed robustness "
        << format_number(ex.executed_robustness) << "\n";
    if (!ex.all_converged()) {
      for (const auto& r : ex.replans)
        if (r.segment.status != PlanStatus::Converged)
          err << "replan for drone " << r.drone << " over [" << format_number(r.window.lower) << ", "
              << format_number(r.window.upper) << "] s: " << to_string(r.segment.status) << "\n";
      return int{NotSatisfied};
    }
    return int{Ok};
  });
}

struct ValidateOptions {
  std::filesystem::path trace;
  std::filesystem::path scenario;
  bool strict_until = false;
};

/// Checks a trace CSV against a scenario: exact robustness, per-sample |v|, |a| bounds and δ_min.
inline int cmd_validate(const ValidateOptions& o, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const Mission m = load_scenario(o.scenario);
    const PlannerConfig& cfg = m.planner;
    const TimeGrid grid(cfg.sample_period, m.horizon);
    const SampledFleet fleet = fleet_from_rows(read_trace_csv(read_file(o.trace)), m, grid);
    Mission copy = m;
    const Formula f =
        build_formula(copy, assign_targets(m), o.strict_until ? UntilReading::Strict : UntilReading::Flattened);
    const ValidationReport rep = validate_samples(fleet, f, m.delta_min, cfg);
    log << "exact robustness " << format_number(rep.exact_robustness) << "\n";
    if (std::isfinite(rep.min_pair_distance)) log << "min pair distance " << format_number(rep.min_pair_distance) << "\n";
    log << rep.violations.size() << " violation(s)\n";
    for (const auto& v : rep.violations) {
      log << "  " << to_string(v.kind);
      if (v.sample >= 0) log << " at row " << v.sample << " (t = " << format_number(v.time) << ")";
      if (v.kind == Violation::Kind::Distance)
        log << " drones " << m.drones[v.drone].id << "/" << m.drones[v.other].id;
      else if (v.kind != Violation::Kind::Robustness)
        log << " drone " << m.drones[v.drone].id << " axis " << "xyz"[v.axis];
      log << ": value " << format_number(v.value);
      if (v.kind != Violation::Kind::Robustness) log << ", bound " << format_number(v.bound);
      log << "\n";
    }
    if (!rep.passed()) {
      auto first = rep.violations.front();
      for (const auto& v : rep.violations)
        if (v.sample >= 0) {
          first = v;
          break;
        }
      err << "trace violates the mission: first " << to_string(first.kind) << " violation";
      if (first.sample >= 0) err << " at t = " << format_number(first.time) << " (row " << first.sample << ")";
      err << "\n";
      return int{NotSatisfied};
    }
    return int{Ok};
  });
}

}  // namespace stlplan::cli
