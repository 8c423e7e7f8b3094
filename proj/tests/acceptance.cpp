// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero when any criterion fails.
// Artifacts are checked from the files the CLI writes, using the reference code in support/oracles.hpp.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "stlplan/cli.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace stlplan;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail.clear();
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) {
    if (pass) detail += (detail.empty() ? "" : ", ") + what;
  }
};

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct PlanRun {
  int code = -1;
  double seconds = 0.0;
  std::string err;
};

PlanRun run_plan(const fs::path& scenario, const fs::path& out, bool energy) {
  std::ostringstream log;
  std::ostringstream err;
  cli::PlanOptions o;
  o.scenario = scenario;
  o.out = out;
  o.energy = energy;
  const auto t0 = std::chrono::steady_clock::now();
  PlanRun r;
  r.code = cli::cmd_plan(o, log, err);
  r.seconds = seconds_since(t0);
  r.err = err.str();
  return r;
}

/// Knot states of every drone and axis as written in result.json.
std::vector<std::array<std::vector<AxisState>, 3>> result_knots(const Json& result) {
  std::vector<std::array<std::vector<AxisState>, 3>> out;
  for (const auto& d : result["drones"]) {
    std::array<std::vector<AxisState>, 3> axes;
    const char* names[3] = {"x", "y", "z"};
    for (std::size_t a = 0; a < 3; ++a)
      for (const auto& row : d["knots"][names[a]]) axes[a].push_back({row[0], row[1], row[2]});
    out.push_back(std::move(axes));
  }
  return out;
}

/// Positions[k][d] from trace rows ordered by (t, drone).
std::vector<std::vector<Vec3>> positions_of(const std::vector<TraceRow>& rows, std::size_t q) {
  std::vector<std::vector<Vec3>> out(rows.size() / q);
  for (std::size_t i = 0; i < rows.size(); ++i) out[i / q].push_back(rows[i].p);
  return out;
}

/// The mission checks shared by the inspection runs, all computed from the written files.
void check_plan_artifacts(const Mission& m, const fs::path& dir, Verdict& v) {
  const Json result = Json::parse(read_file(dir / "result.json"));
  const auto rows = read_trace_csv(read_file(dir / "trace.csv"));
  const std::size_t q = m.drones.size();
  const double ts = m.planner.sample_period;
  const double vmax = m.planner.v_max;
  const double amax = m.planner.a_max;

  v.require(result["status"] == "Converged", "status " + result["status"].get<std::string>());
  const double rho = result["exact_robustness"].get<double>();
  v.require(rho > 0.0, "exact robustness " + num(rho));

  // knot and intra-segment bounds: knot values, then dense sampling of the polynomial through each pair
  double knot_v = 0.0;
  double knot_a = 0.0;
  double dense_v = 0.0;
  double dense_a = 0.0;
  const double kp = result["knot_period"].get<double>();
  for (const auto& axes : result_knots(result))
    for (const auto& axis : axes) {
      for (const auto& k : axis) {
        knot_v = std::max(knot_v, std::abs(k.v));
        knot_a = std::max(knot_a, std::abs(k.a));
      }
      const auto [pv, pa] = oracle::dense_peaks(axis, kp, 400);
      dense_v = std::max(dense_v, pv);
      dense_a = std::max(dense_a, pa);
    }
  v.require(knot_v <= vmax && knot_a <= amax, "knot peak |v| " + num(knot_v) + " |a| " + num(knot_a));
  v.require(dense_v <= vmax && dense_a <= amax, "segment peak |v| " + num(dense_v) + " |a| " + num(dense_a));
  double sample_v = 0.0;
  double sample_a = 0.0;
  for (const auto& r : rows) {
    sample_v = std::max(sample_v, r.v.cwiseAbs().maxCoeff());
    sample_a = std::max(sample_a, r.a.cwiseAbs().maxCoeff());
  }
  v.require(sample_v <= vmax && sample_a <= amax, "sample peak |v| " + num(sample_v) + " |a| " + num(sample_a));

  const auto pos = positions_of(rows, q);
  v.require(pos.size() == static_cast<std::size_t>(std::llround(m.horizon / ts)) + 1, "trace row count");
  double dmin = std::numeric_limits<double>::infinity();
  for (const auto& at : pos)
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t h = i + 1; h < q; ++h) dmin = std::min(dmin, (at[i] - at[h]).norm());
  if (q > 1) v.require(dmin >= m.delta_min, "min pair distance " + num(dmin));

  // every assigned target visited in [0, D], home reached in [D, T]
  const auto kd = static_cast<std::size_t>(std::llround(m.deadline() / ts));
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t t = i; t < m.targets.size(); t += q) {
      bool seen = false;
      for (std::size_t k = 0; k <= kd; ++k) seen = seen || oracle::box_margin(m.targets[t], pos[k][i]) >= 0.0;
      if (!seen) v.require(false, "drone " + std::to_string(m.drones[i].id) + " misses " + m.targets[t].name());
    }
    bool home = false;
    for (std::size_t k = kd; k < pos.size(); ++k) home = home || oracle::box_margin(m.drones[i].home, pos[k][i]) >= 0.0;
    if (!home) v.require(false, "drone " + std::to_string(m.drones[i].id) + " never home");
  }
  const double ref = oracle::mission_robustness(m, pos, ts);
  v.require(ref > 0.0, "reference robustness " + num(ref));
  v.note("robustness " + num(rho) + " (reference " + num(ref) + ")");
  v.note("peak |v| " + num(dense_v) + ", |a| " + num(dense_a));
  if (q > 1) v.note("min distance " + num(dmin));
}

Verdict inspection_run(const std::string& scenario, const fs::path& out, double budget) {
  Verdict v;
  const Mission m = fixture::scenario(scenario);
  const PlanRun r = run_plan(fixture::scenario_path(scenario), out, false);
  v.require(r.code == 0, "cmd_plan exit " + std::to_string(r.code) + " " + r.err);
  v.require(r.seconds <= budget, "took " + num(r.seconds) + " s");
  if (fs::exists(out / "result.json")) check_plan_artifacts(m, out, v);
  v.note(num(r.seconds) + " s");
  return v;
}

Verdict energy_comparison(const fs::path& root) {
  Verdict v;
  const std::string name = "power_tower_energy";
  const Mission m = fixture::scenario(name);
  const PlanRun basic = run_plan(fixture::scenario_path(name), root / "basic", false);
  const PlanRun ea = run_plan(fixture::scenario_path(name), root / "energy", true);
  v.require(basic.code == 0, "basic exit " + std::to_string(basic.code));
  v.require(ea.code == 0, "energy-aware exit " + std::to_string(ea.code));
  if (!fs::exists(root / "basic" / "result.json") || !fs::exists(root / "energy" / "result.json")) return v;
  const Json rb = Json::parse(read_file(root / "basic" / "result.json"));
  const Json re = Json::parse(read_file(root / "energy" / "result.json"));
  const double rho_b = rb["exact_robustness"].get<double>();
  const double rho_e = re["exact_robustness"].get<double>();
  v.require(rho_e > 0.0, "energy-aware robustness " + num(rho_e));
  v.require(rho_e <= rho_b + 1e-9, "energy-aware robustness " + num(rho_e) + " above basic " + num(rho_b));

  // per-drone Σ‖a‖² recomputed from each trace
  const auto energy_from = [&](const fs::path& dir) {
    std::vector<double> e(m.drones.size(), 0.0);
    const auto rows = read_trace_csv(read_file(dir / "trace.csv"));
    for (std::size_t i = 0; i < rows.size(); ++i) e[i % m.drones.size()] += rows[i].a.squaredNorm();
    return e;
  };
  const auto eb = energy_from(root / "basic");
  const auto ee = energy_from(root / "energy");
  for (std::size_t d = 0; d < m.drones.size(); ++d) {
    const double reported = re["drones"][d]["energy_total"].get<double>();
    v.require(std::abs(reported - ee[d]) <= 1e-6 * (1.0 + ee[d]), "reported energy differs from trace");
    v.require(ee[d] <= 1.01 * eb[d], "drone " + std::to_string(m.drones[d].id) + " energy " + num(ee[d]) +
                                         " vs basic " + num(eb[d]));
    v.note("drone " + std::to_string(m.drones[d].id) + " energy " + num(ee[d]) + " vs " + num(eb[d]));
  }
  v.note("robustness " + num(rho_e) + " vs " + num(rho_b));
  return v;
}

Verdict replanning(const fs::path& plan_dir, const fs::path& out) {
  Verdict v;
  const std::string name = "power_tower_disturbed";
  const Mission m = fixture::scenario(name);
  std::ostringstream log;
  std::ostringstream err;
  cli::SimulateOptions o;
  o.scenario = fixture::scenario_path(name);
  o.plan = plan_dir;
  o.out = out;
  const int code = cli::cmd_simulate(o, log, err);
  v.require(code == 0, "cmd_simulate exit " + std::to_string(code) + " " + err.str());
  if (!fs::exists(out / "triggers.csv")) return v;

  std::istringstream trig(read_file(out / "triggers.csv"));
  std::string line;
  std::size_t triggers = 0;
  std::getline(trig, line);
  while (std::getline(trig, line)) triggers += line.empty() ? 0 : 1;
  v.require(triggers == 2, std::to_string(triggers) + " triggers");

  const Json rep = Json::parse(read_file(out / "replans.json"));
  const auto plan_rows = read_trace_csv(read_file(plan_dir / "trace.csv"));
  const std::size_t q = m.drones.size();
  const double ts = m.planner.sample_period;
  double worst_gap = 0.0;
  double worst_time = 0.0;
  for (const auto& r : rep["replans"]) {
    v.require(r["status"] == "Converged", "replan status " + r["status"].get<std::string>());
    const auto d = m.drone_index(r["drone"].get<int>());
    const auto k1 = static_cast<std::size_t>(std::llround(r["window"][1].get<double>() / ts));
    Vec3 end;
    const char* names[3] = {"x", "y", "z"};
    for (int a = 0; a < 3; ++a) end[a] = r["knots"][names[a]].back()[0].get<double>();
    worst_gap = std::max(worst_gap, (end - plan_rows[k1 * q + d].p).norm());
    worst_time = std::max(worst_time, r["solve_seconds"].get<double>());
  }
  v.require(rep["replans"].size() == 2, std::to_string(rep["replans"].size()) + " replans");
  v.require(worst_gap <= 1e-3, "reconnection gap " + num(worst_gap) + " m");
  v.require(worst_time <= 5.0, "replan took " + num(worst_time) + " s");
  v.note("2 triggers, reconnection gap " + num(worst_gap) + " m, slowest replan " + num(worst_time) + " s");
  return v;
}

Verdict oracle_equivalence() {
  Verdict v;
  std::mt19937_64 rng(2024);
  int single_bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto st = oracle::random_signal_trace(rng, 4, 16, 0.1);
    const auto node = oracle::random_node_exact_depth(rng, 1, 4, 8);
    const Formula f = oracle::to_formula(*node, 0.1, st.offsets);
    for (int k = 0; k + oracle::reach(*node) <= 16; ++k)
      if (robustness(f, st.trace, k) != oracle::eval_exact(*node, st.signals, k)) ++single_bad;
  }
  double nested_err = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto st = oracle::random_signal_trace(rng, 5, 24, 0.5);
    const auto node = oracle::random_node_exact_depth(rng, 3, 5, 5);
    const Formula f = oracle::to_formula(*node, 0.5, st.offsets);
    const int k = std::uniform_int_distribution<int>(0, 24 - oracle::reach(*node))(rng);
    nested_err = std::max(nested_err, std::abs(robustness(f, st.trace, k) - oracle::eval_exact(*node, st.signals, k)));
  }
  v.require(single_bad == 0, std::to_string(single_bad) + " single-operator mismatches");
  v.require(nested_err <= 1e-12, "nested error " + num(nested_err));
  v.note("1000 single-operator exact, 1000 nested max error " + num(nested_err));
  return v;
}

Verdict lse_bound() {
  Verdict v;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  double worst_ratio = 0.0;
  int monotone_bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int m = std::uniform_int_distribution<int>(1, 50)(rng);
    std::vector<double> xs;
    for (int i = 0; i < m; ++i) xs.push_back(u(rng));
    const double mx = *std::max_element(xs.begin(), xs.end());
    const double mn = *std::min_element(xs.begin(), xs.end());
    double err_max[3];
    double err_min[3];
    int i = 0;
    for (double c : {1.0, 5.0, 50.0}) {
      const double bound = std::log(static_cast<double>(m)) / c;
      err_max[i] = std::abs(smooth_max(xs, c) - mx);
      err_min[i] = std::abs(smooth_min(xs, c) - mn);
      // independent extended-precision value as a cross-check
      v.require(std::abs(smooth_max(xs, c) - static_cast<double>(oracle::lse_max(xs, c))) <= 1e-12 * (1 + std::abs(mx)),
                "smooth max differs from reference");
      if (bound > 0.0) worst_ratio = std::max({worst_ratio, err_max[i] / bound, err_min[i] / bound});
      v.require(err_max[i] <= bound + 1e-12 && err_min[i] <= bound + 1e-12,
                "bound exceeded at m = " + std::to_string(m) + ", c = " + num(c));
      ++i;
    }
    if (err_max[2] > err_max[1] + 1e-12 || err_min[2] > err_min[1] + 1e-12) ++monotone_bad;
  }
  v.require(monotone_bad == 0, std::to_string(monotone_bad) + " sets where c = 50 is worse than c = 5");
  v.note("1000 sets, worst error / ln(m)/c = " + num(worst_ratio));
  return v;
}

Verdict gradient_check() {
  Verdict v;
  constexpr double h = 1e-6;
  double worst = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(1000 + seed));
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const Region box("b", Box{Vec3(-1, -1.5, -0.5), Vec3(1.5, 1, 2)});
    const std::vector<Formula> leaves{
        pred(AffineHalfspace{0, Channel::Position, Vec3(u(rng), u(rng), u(rng)), u(rng)}),
        pred(AffineHalfspace{1, Channel::Velocity, Vec3(u(rng), u(rng), u(rng)), u(rng)}),
        pred(InsideRegion{1, Channel::Position, box}), pred(OutsideRegion{0, box}), pred(PairDistance{0, 1, 1.0})};
    const auto node = oracle::random_node_exact_depth(rng, 3, static_cast<int>(leaves.size()), 3);
    const std::ptrdiff_t steps = oracle::reach(*node) + 1;
    const Formula f = oracle::build(*node, 0.2, leaves);
    Trace t(TimeGrid::from_steps(0.2, steps), 2);
    std::uniform_real_distribution<double> w(-3.0, 3.0);
    for (std::ptrdiff_t k = 0; k <= steps; ++k)
      for (std::size_t d = 0; d < 2; ++d) {
        t.position(k, d) = Vec3(w(rng), w(rng), w(rng));
        t.velocity(k, d) = Vec3(w(rng), w(rng), w(rng));
      }
    const double c = 5.0;
    const auto g = smooth_robustness_gradient(f, t, 0, c);
    double num2 = 0.0;
    double den2 = 0.0;
    for (std::ptrdiff_t k = 0; k <= steps; ++k)
      for (std::size_t d = 0; d < 2; ++d)
        for (Channel ch : {Channel::Position, Channel::Velocity})
          for (int j = 0; j < 3; ++j) {
            Trace tp = t;
            Trace tm = t;
            tp.channel(ch, k, d)[j] += h;
            tm.channel(ch, k, d)[j] -= h;
            const double fd = (smooth_robustness(f, tp, 0, c) - smooth_robustness(f, tm, 0, c)) / (2.0 * h);
            const double an = g.gradient.channel(ch, k, d)[j];
            num2 += (an - fd) * (an - fd);
            den2 += fd * fd;
          }
    worst = std::max(worst, std::sqrt(num2) / std::max(std::sqrt(den2), 1e-8));
  }
  v.require(worst <= 1e-4, "relative error " + num(worst));
  v.note("100 formulas, worst relative error " + num(worst));
  return v;
}

Verdict spline_suite() {
  Verdict v;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> dur(0.3, 4.0);
  double endpoint = 0.0;
  double rest = 0.0;
  double peaks = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const AxisState a{u(rng), u(rng), u(rng)};
    const AxisState b{u(rng), u(rng), u(rng)};
    const double T = dur(rng);
    const auto s = solve_boundary(a, b, T);
    const AxisState e = eval(s, T);
    endpoint = std::max({endpoint, std::abs(e.p - b.p), std::abs(e.v - b.v), std::abs(e.a - b.a)});

    const double dp = u(rng);
    const auto r = segment_feasible(solve_boundary({0, 0, 0}, {dp, 0, 0}, T), 1e9, 1e9);
    rest = std::max(rest, std::abs(r.peak_v - 1.875 * std::abs(dp) / T));

    // closed-form peaks against 1e5-point sampling of the independently solved polynomial
    const auto f = segment_feasible(s, 1e9, 1e9);
    const auto c = oracle::quintic_coefficients(a, b, T);
    double pv = 0.0;
    double pa = 0.0;
    constexpr int n = 100000;
    for (int i = 0; i <= n; ++i) {
      const auto x = oracle::eval_poly(c, T * i / n);
      pv = std::max(pv, std::abs(x.v));
      pa = std::max(pa, std::abs(x.a));
    }
    peaks = std::max({peaks, std::abs(f.peak_v - pv), std::abs(f.peak_a - pa)});
  }
  v.require(endpoint <= 1e-9, "endpoint error " + num(endpoint));
  v.require(rest <= 1e-9, "rest-to-rest error " + num(rest));
  v.require(peaks <= 1e-6, "peak error " + num(peaks));
  v.note("endpoint " + num(endpoint) + ", rest-to-rest " + num(rest) + ", peaks " + num(peaks));
  return v;
}

Verdict determinism(const fs::path& first, const fs::path& second) {
  Verdict v;
  const PlanRun r = run_plan(fixture::scenario_path("power_tower"), second, false);
  v.require(r.code == 0, "second run exit " + std::to_string(r.code));
  for (const char* f : {"result.json", "trace.csv"}) {
    const bool same = fs::exists(first / f) && fs::exists(second / f) && read_file(first / f) == read_file(second / f);
    v.require(same, std::string(f) + " differs");
  }
  v.note("result.json and trace.csv byte-identical");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "stlplan_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  const std::vector<std::pair<int, std::function<Verdict()>>> criteria{
      {1, [&] { return inspection_run("power_tower", root / "c1", 120.0); }},
      {2, [&] { return inspection_run("power_tower_4x8", root / "c2", 300.0); }},
      {3, [&] { return energy_comparison(root / "c3"); }},
      {4, [&] { return replanning(root / "c1", root / "c4"); }},
      {5, oracle_equivalence},
      {6, lse_bound},
      {7, gradient_check},
      {8, spline_suite},
      {9, [&] { return determinism(root / "c1", root / "c9"); }},
  };
  int failed = 0;
  for (const auto& [id, run] : criteria) {
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failed += v.pass ? 0 : 1;
    std::cout << "criterion " << id << ": " << (v.pass ? "PASS" : "FAIL") << " (" << v.detail << ")" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
