#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "stlplan/errors.hpp"
#include "stlplan/mission.hpp"
#include "stlplan/planner.hpp"

namespace stlplan {

inline constexpr std::string_view trace_header = "t,drone,px,py,pz,vx,vy,vz,ax,ay,az";

/// One CSV row: time, drone id, position, velocity, acceleration.
struct TraceRow {
  double t = 0.0;
  int drone = 0;
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

/// Shortest decimal text that parses back to the same double.
inline std::string format_number(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return {buf.data(), res.ptr};
}

inline double parse_number(std::string_view s, const std::string& where) {
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty() || !std::isfinite(x))
    throw ParseError(where + ": '" + std::string(s) + "' is not a finite number");
  return x;
}

/// Rows ordered by (t, drone); `ids[d]` is the id written for fleet index d.
inline std::vector<TraceRow> trace_rows(const SampledFleet& fleet, const std::vector<int>& ids) {
  std::vector<TraceRow> rows;
  const Trace& tr = fleet.trace;
  for (std::ptrdiff_t k = 0; k < tr.sample_count(); ++k)
    for (std::size_t d = 0; d < tr.drone_count(); ++d)
      rows.push_back({tr.grid().time(k), ids.at(d), tr.position(k, d), tr.velocity(k, d), fleet.accel(k, d)});
  return rows;
}

inline std::string write_trace_csv(const std::vector<TraceRow>& rows) {
  std::string out(trace_header);
  out += '\n';
  for (const auto& r : rows) {
    out += format_number(r.t);
    out += ',';
    out += std::to_string(r.drone);
    for (const Vec3* v : {&r.p, &r.v, &r.a})
      for (int j = 0; j < 3; ++j) {
        out += ',';
        out += format_number((*v)[j]);
      }
    out += '\n';
  }
  return out;
}

inline std::vector<TraceRow> read_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("trace: empty document");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != trace_header) throw ParseError("trace line 1: header must be '" + std::string(trace_header) + "'");
  std::vector<TraceRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      cells.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    const std::string where = "trace line " + std::to_string(lineno);
    if (cells.size() != 11) throw ParseError(where + ": expected 11 fields, found " + std::to_string(cells.size()));
    TraceRow r;
    r.t = parse_number(cells[0], where + " t");
    int id = 0;
    const auto res = std::from_chars(cells[1].data(), cells[1].data() + cells[1].size(), id);
    if (res.ec != std::errc{} || res.ptr != cells[1].data() + cells[1].size() || cells[1].empty())
      throw ParseError(where + " drone: '" + std::string(cells[1]) + "' is not an integer id");
    r.drone = id;
    for (int j = 0; j < 3; ++j) {
      r.p[j] = parse_number(cells[static_cast<std::size_t>(2 + j)], where);
      r.v[j] = parse_number(cells[static_cast<std::size_t>(5 + j)], where);
      r.a[j] = parse_number(cells[static_cast<std::size_t>(8 + j)], where);
    }
    rows.push_back(r);
  }
  return rows;
}

/// Rebuilds fleet samples for `mission` on `grid`. Every (sample, drone) pair must appear exactly once,
/// in (t, drone) order.
inline SampledFleet fleet_from_rows(const std::vector<TraceRow>& rows, const Mission& mission, const TimeGrid& grid) {
  const std::size_t q = mission.drones.size();
  if (rows.size() != static_cast<std::size_t>(grid.count()) * q)
    throw ParseError("trace: expected " + std::to_string(static_cast<std::size_t>(grid.count()) * q) + " rows, found " +
                     std::to_string(rows.size()));
  SampledFleet fleet(grid, q);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const auto k = static_cast<std::ptrdiff_t>(i / q);
    const std::size_t d = i % q;
    const std::string where = "trace row " + std::to_string(i);
    if (std::abs(r.t - grid.time(k)) > 1e-9 * grid.sample_period())
      throw ParseError(where + ": time " + format_number(r.t) + " is off the sampling grid or out of order");
    if (r.drone != mission.drones[d].id)
      throw ParseError(where + ": drone " + std::to_string(r.drone) + " out of order (expected " +
                       std::to_string(mission.drones[d].id) + ")");
    fleet.trace.position(k, d) = r.p;
    fleet.trace.velocity(k, d) = r.v;
    fleet.accel(k, d) = r.a;
  }
  return fleet;
}

}  // namespace stlplan
