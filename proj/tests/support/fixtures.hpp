#pragma once

#include <filesystem>
#include <string>

#include "stlplan/cli.hpp"
#include "stlplan/stlplan.hpp"

namespace fixture {

inline std::filesystem::path scenario_path(const std::string& name) {
  return std::filesystem::path(STLPLAN_SCENARIO_DIR) / (name + ".json");
}

inline stlplan::Mission scenario(const std::string& name) { return stlplan::load_scenario(scenario_path(name)); }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("stlplan_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

/// One drone in an open workspace with a single target.
inline stlplan::Mission single_drone(const stlplan::Vec3& start, const stlplan::Region& target, double horizon) {
  stlplan::Mission m;
  stlplan::DroneSpec d;
  d.id = 1;
  d.position = start;
  d.home = stlplan::default_home(1, start);
  m.drones = {d};
  m.targets = {target};
  m.horizon = horizon;
  return m;
}

}  // namespace fixture
