#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "stlplan/cli.hpp"

int main(int argc, char** argv) {
  namespace sc = stlplan::cli;
  CLI::App app{"STL mission planner for drone fleets"};
  app.require_subcommand(1);

  sc::PlanOptions plan;
  std::string plan_scenario, plan_out;
  std::uint64_t seed = 0;
  double energy_weight = 0.0;
  auto* p = app.add_subcommand("plan", "maximize smooth robustness and export trace, robustness, energy, result");
  p->add_option("--scenario", plan_scenario, "scenario JSON")->required();
  p->add_option("--out", plan_out, "output directory")->required();
  p->add_flag("--energy", plan.energy, "add the energy term to the objective");
  auto* seed_opt = p->add_option("--seed", seed, "multistart seed (default: scenario planner.rng_seed)");
  auto* ew_opt = p->add_option("--energy-weight", energy_weight, "override planner.energy_weight");
  p->add_flag("--strict-until", plan.strict_until, "use the strict until mission formula");

  sc::SimulateOptions sim;
  std::string sim_scenario, sim_plan, sim_out;
  auto* s = app.add_subcommand("simulate", "replay a plan with disturbances and event-triggered replanning");
  s->add_option("--scenario", sim_scenario, "scenario JSON with replanner.disturbances")->required();
  s->add_option("--plan", sim_plan, "directory written by plan")->required();
  s->add_option("--out", sim_out, "output directory")->required();
  s->add_flag("--strict-until", sim.strict_until, "use the strict until mission formula");

  sc::ValidateOptions val;
  std::string val_trace, val_scenario;
  auto* v = app.add_subcommand("validate", "check a trace CSV against a scenario");
  v->add_option("--trace", val_trace, "trace CSV")->required();
  v->add_option("--scenario", val_scenario, "scenario JSON")->required();
  v->add_flag("--strict-until", val.strict_until, "use the strict until mission formula");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : sc::InputError;
  }

  if (*p) {
    plan.scenario = plan_scenario;
    plan.out = plan_out;
    if (*seed_opt) plan.seed = seed;
    if (*ew_opt) plan.energy_weight = energy_weight;
    return sc::cmd_plan(plan, std::cout, std::cerr);
  }
  if (*s) {
    sim.scenario = sim_scenario;
    sim.plan = sim_plan;
    sim.out = sim_out;
    return sc::cmd_simulate(sim, std::cout, std::cerr);
  }
  val.trace = val_trace;
  val.scenario = val_scenario;
  return sc::cmd_validate(val, std::cout, std::cerr);
}
