#pragma once

#include <cmath>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "stlplan/errors.hpp"
#include "stlplan/file_io.hpp"
#include "stlplan/mission.hpp"

namespace stlplan {

using Json = nlohmann::json;

namespace detail::scenario {

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) { throw ParseError(path + ": " + msg); }

inline void keys(const Json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) fail(path + "." + key, "unknown key");
  }
}

inline const Json& required(const Json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) fail(path + "." + key, "missing required key");
  return j.at(key);
}

inline double number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) fail(path, "expected a finite number");
  return x;
}

inline int integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

inline std::uint64_t unsigned_integer(const Json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    fail(path, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

inline bool boolean(const Json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  return j.get<bool>();
}

inline Vec3 vec3(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) fail(path, "expected an array of 3 numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) v[i] = number(j[static_cast<std::size_t>(i)], path + "[" + std::to_string(i) + "]");
  return v;
}

inline Json vec3(const Vec3& v) { return Json::array({v[0], v[1], v[2]}); }

inline Region region(const Json& j, const std::string& path) {
  keys(j, path, {"name", "box", "faces"});
  const Json& name = required(j, path, "name");
  if (!name.is_string()) fail(path + ".name", "expected a string");
  const bool has_box = j.contains("box");
  if (has_box == j.contains("faces")) fail(path, "exactly one of 'box' or 'faces' is required");
  try {
    if (has_box) {
      const Json& b = j.at("box");
      keys(b, path + ".box", {"min", "max"});
      return Region(name.get<std::string>(),
                    Box{vec3(required(b, path + ".box", "min"), path + ".box.min"),
                        vec3(required(b, path + ".box", "max"), path + ".box.max")});
    }
    const Json& fs = j.at("faces");
    if (!fs.is_array()) fail(path + ".faces", "expected an array");
    std::vector<Face> faces;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      const std::string fp = path + ".faces[" + std::to_string(i) + "]";
      keys(fs[i], fp, {"normal", "offset"});
      faces.push_back(Face{vec3(required(fs[i], fp, "normal"), fp + ".normal"),
                           number(required(fs[i], fp, "offset"), fp + ".offset")});
    }
    return Region(name.get<std::string>(), faces);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline Json region(const Region& r) {
  Json j;
  j["name"] = r.name();
  if (const auto* b = std::get_if<Box>(&r.shape())) {
    j["box"] = {{"min", vec3(b->min)}, {"max", vec3(b->max)}};
  } else {
    Json faces = Json::array();
    for (const auto& f : std::get<ConvexPolyhedron>(r.shape()).faces)
      faces.push_back({{"normal", vec3(f.normal)}, {"offset", f.offset}});
    j["faces"] = faces;
  }
  return j;
}

inline std::vector<Region> regions(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  std::vector<Region> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(region(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline PlannerConfig planner(const Json& j, const std::string& path) {
  keys(j, path,
       {"c", "sample_period", "knot_period", "v_max", "a_max", "max_iterations", "tolerance", "multistart_count",
        "rng_seed", "energy_weight", "decouple_axes", "multistart_noise", "penalty_weight", "penalty_rounds",
        "penalty_margin", "lbfgs_memory"});
  PlannerConfig c;
  const auto num = [&](const char* k, double& dst) {
    if (j.contains(k)) dst = number(j.at(k), path + "." + k);
  };
  const auto intg = [&](const char* k, int& dst) {
    if (j.contains(k)) dst = integer(j.at(k), path + "." + k);
  };
  num("c", c.c);
  num("sample_period", c.sample_period);
  num("knot_period", c.knot_period);
  num("v_max", c.v_max);
  num("a_max", c.a_max);
  intg("max_iterations", c.max_iterations);
  num("tolerance", c.tolerance);
  intg("multistart_count", c.multistart_count);
  if (j.contains("rng_seed")) c.rng_seed = unsigned_integer(j.at("rng_seed"), path + ".rng_seed");
  num("energy_weight", c.energy_weight);
  if (j.contains("decouple_axes")) c.decouple_axes = boolean(j.at("decouple_axes"), path + ".decouple_axes");
  num("multistart_noise", c.multistart_noise);
  num("penalty_weight", c.penalty_weight);
  intg("penalty_rounds", c.penalty_rounds);
  num("penalty_margin", c.penalty_margin);
  intg("lbfgs_memory", c.lbfgs_memory);
  if (!(c.c >= 1.0)) fail(path + ".c", "must be >= 1");
  if (!(c.sample_period > 0.0)) fail(path + ".sample_period", "must be positive");
  if (!(c.knot_period > 0.0)) fail(path + ".knot_period", "must be positive");
  if (!(c.v_max > 0.0)) fail(path + ".v_max", "must be positive");
  if (!(c.a_max > 0.0)) fail(path + ".a_max", "must be positive");
  if (c.max_iterations < 0) fail(path + ".max_iterations", "must be non-negative");
  if (!(c.tolerance >= 0.0)) fail(path + ".tolerance", "must be non-negative");
  if (c.multistart_count < 1) fail(path + ".multistart_count", "must be at least 1");
  if (!(c.energy_weight >= 0.0)) fail(path + ".energy_weight", "must be non-negative");
  if (!(c.multistart_noise >= 0.0)) fail(path + ".multistart_noise", "must be non-negative");
  if (!(c.penalty_weight >= 0.0)) fail(path + ".penalty_weight", "must be non-negative");
  if (c.penalty_rounds < 1) fail(path + ".penalty_rounds", "must be at least 1");
  if (!(c.penalty_margin >= 0.0 && c.penalty_margin < 1.0)) fail(path + ".penalty_margin", "must lie in [0, 1)");
  if (c.lbfgs_memory < 1) fail(path + ".lbfgs_memory", "must be at least 1");
  return c;
}

inline Json planner(const PlannerConfig& c) {
  return {{"c", c.c},
          {"sample_period", c.sample_period},
          {"knot_period", c.knot_period},
          {"v_max", c.v_max},
          {"a_max", c.a_max},
          {"max_iterations", c.max_iterations},
          {"tolerance", c.tolerance},
          {"multistart_count", c.multistart_count},
          {"rng_seed", c.rng_seed},
          {"energy_weight", c.energy_weight},
          {"decouple_axes", c.decouple_axes},
          {"multistart_noise", c.multistart_noise},
          {"penalty_weight", c.penalty_weight},
          {"penalty_rounds", c.penalty_rounds},
          {"penalty_margin", c.penalty_margin},
          {"lbfgs_memory", c.lbfgs_memory}};
}

inline ReplannerSettings replanner(const Json& j, const std::string& path) {
  keys(j, path, {"eta", "event_period", "topic_period", "disturbances"});
  ReplannerSettings r;
  if (j.contains("eta")) r.trigger.eta = number(j.at("eta"), path + ".eta");
  if (j.contains("event_period")) r.trigger.event_period = number(j.at("event_period"), path + ".event_period");
  if (j.contains("topic_period")) r.trigger.topic_period = number(j.at("topic_period"), path + ".topic_period");
  if (!(r.trigger.eta > 0.0)) fail(path + ".eta", "must be positive");
  if (!(r.trigger.event_period > 0.0)) fail(path + ".event_period", "must be positive");
  if (!(r.trigger.topic_period > 0.0)) fail(path + ".topic_period", "must be positive");
  if (j.contains("disturbances")) {
    const Json& ds = j.at("disturbances");
    if (!ds.is_array()) fail(path + ".disturbances", "expected an array");
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const std::string dp = path + ".disturbances[" + std::to_string(i) + "]";
      keys(ds[i], dp, {"drone", "onset", "offset", "decay"});
      Disturbance d;
      d.drone = integer(required(ds[i], dp, "drone"), dp + ".drone");
      d.onset = number(required(ds[i], dp, "onset"), dp + ".onset");
      d.offset = vec3(required(ds[i], dp, "offset"), dp + ".offset");
      if (ds[i].contains("decay")) d.decay = number(ds[i].at("decay"), dp + ".decay");
      r.disturbances.push_back(d);
    }
  }
  return r;
}

inline Json replanner(const ReplannerSettings& r) {
  Json ds = Json::array();
  for (const auto& d : r.disturbances)
    ds.push_back({{"drone", d.drone}, {"onset", d.onset}, {"offset", vec3(d.offset)}, {"decay", d.decay}});
  return {{"eta", r.trigger.eta},
          {"event_period", r.trigger.event_period},
          {"topic_period", r.trigger.topic_period},
          {"disturbances", ds}};
}

inline DroneSpec drone(const Json& j, const std::string& path) {
  keys(j, path, {"id", "initial", "heading_per_target", "home"});
  DroneSpec d;
  d.id = integer(required(j, path, "id"), path + ".id");
  const Json& init = required(j, path, "initial");
  keys(init, path + ".initial", {"position", "velocity", "acceleration"});
  d.position = vec3(required(init, path + ".initial", "position"), path + ".initial.position");
  if (init.contains("velocity")) d.velocity = vec3(init.at("velocity"), path + ".initial.velocity");
  if (init.contains("acceleration")) d.acceleration = vec3(init.at("acceleration"), path + ".initial.acceleration");
  if (j.contains("heading_per_target")) {
    const Json& h = j.at("heading_per_target");
    if (!h.is_array()) fail(path + ".heading_per_target", "expected an array");
    for (std::size_t i = 0; i < h.size(); ++i)
      d.heading_per_target.push_back(number(h[i], path + ".heading_per_target[" + std::to_string(i) + "]"));
  }
  d.home = j.contains("home") ? region(j.at("home"), path + ".home") : default_home(d.id, d.position);
  return d;
}

inline Json drone(const DroneSpec& d) {
  return {{"id", d.id},
          {"initial",
           {{"position", vec3(d.position)}, {"velocity", vec3(d.velocity)}, {"acceleration", vec3(d.acceleration)}}},
          {"heading_per_target", d.heading_per_target},
          {"home", region(d.home)}};
}

}  // namespace detail::scenario

/// Parses and validates a scenario document. Errors name the offending field path.
inline Mission mission_from_json(const Json& j) {
  namespace s = detail::scenario;
  s::keys(j, "$",
          {"workspace", "obstacles", "targets", "drones", "delta_min", "cluster_count", "horizon", "visit_deadline",
           "planner", "replanner"});
  Mission m;
  if (j.contains("workspace")) m.workspace = s::region(j.at("workspace"), "$.workspace");
  if (j.contains("obstacles")) m.obstacles = s::regions(j.at("obstacles"), "$.obstacles");
  m.targets = s::regions(s::required(j, "$", "targets"), "$.targets");
  const Json& ds = s::required(j, "$", "drones");
  if (!ds.is_array()) s::fail("$.drones", "expected an array");
  for (std::size_t i = 0; i < ds.size(); ++i) m.drones.push_back(s::drone(ds[i], "$.drones[" + std::to_string(i) + "]"));
  if (j.contains("delta_min")) m.delta_min = s::number(j.at("delta_min"), "$.delta_min");
  if (j.contains("cluster_count")) m.cluster_count = s::integer(j.at("cluster_count"), "$.cluster_count");
  if (j.contains("horizon")) m.horizon = s::number(j.at("horizon"), "$.horizon");
  if (j.contains("visit_deadline")) m.visit_deadline = s::number(j.at("visit_deadline"), "$.visit_deadline");
  if (j.contains("planner")) m.planner = s::planner(j.at("planner"), "$.planner");
  if (j.contains("replanner")) m.replanner = s::replanner(j.at("replanner"), "$.replanner");
  validate_mission(m);
  return m;
}

inline Json mission_to_json(const Mission& m) {
  namespace s = detail::scenario;
  Json j;
  j["workspace"] = s::region(m.workspace);
  j["obstacles"] = Json::array();
  for (const auto& r : m.obstacles) j["obstacles"].push_back(s::region(r));
  j["targets"] = Json::array();
  for (const auto& r : m.targets) j["targets"].push_back(s::region(r));
  j["drones"] = Json::array();
  for (const auto& d : m.drones) j["drones"].push_back(s::drone(d));
  j["delta_min"] = m.delta_min;
  j["cluster_count"] = m.cluster_count;
  j["horizon"] = m.horizon;
  if (m.visit_deadline) j["visit_deadline"] = *m.visit_deadline;
  j["planner"] = s::planner(m.planner);
  j["replanner"] = s::replanner(m.replanner);
  return j;
}

inline Mission parse_scenario(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("$: malformed document: ") + e.what());
  }
  return mission_from_json(j);
}

inline Mission load_scenario(const std::filesystem::path& path) { return parse_scenario(read_file(path)); }

inline void save_scenario(const Mission& m, const std::filesystem::path& path) {
  write_file_atomic(path, mission_to_json(m).dump(2) + "\n");
}

}  // namespace stlplan
