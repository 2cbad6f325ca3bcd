#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "swarm/engine.hpp"
#include "swarm/experiment.hpp"
#include "swarm/scenario.hpp"

namespace {

struct CommonArgs {
  std::string scenario_path;
  std::string out_dir;
  double dt = 0.0;  // 0 = keep the scenario's value
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-s,--scenario", args.scenario_path, "Scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("-o,--out", args.out_dir, "Output directory (default: scenario's out_dir)");
  cmd->add_option("--dt", args.dt, "Override tick length in seconds")
      ->check(CLI::PositiveNumber);
}

swarm::Scenario load(const CommonArgs& args) {
  swarm::Scenario s = swarm::load_scenario(args.scenario_path);
  if (args.dt > 0.0) {
    s.cfg.dt = args.dt;
    s.cfg.validate();
  }
  if (!args.out_dir.empty()) s.out_dir = args.out_dir;
  return s;
}

int cmd_run(const CommonArgs& args, const std::string& policy) {
  swarm::Scenario s = load(args);
  swarm::EngineOptions opts;
  opts.policy = policy == "nearest" ? swarm::Policy::NearestLane : swarm::Policy::Optimized;
  swarm::RunResult r = swarm::Engine(s, opts).run();
  swarm::emit_run(r, s, s.out_dir);
  std::printf("scenario: %s\n", s.name.c_str());
  std::printf("policy: %s\n", policy.c_str());
  std::printf("complete: %s\n", r.complete ? "yes" : "no");
  std::printf("ticks: %ld (%.1f s)\n", r.ticks, r.duration_s());
  std::printf("grouping events: %zu\n", r.events.size());
  for (const auto& ev : r.events) {
    std::printf("  tick %ld parent %s sizes [", ev.tick, ev.parent_tag.c_str());
    for (size_t i = 0; i < ev.sizes.size(); ++i)
      std::printf("%s%d", i ? " " : "", ev.sizes[i]);
    std::printf("] predicted %.1f s\n", ev.predicted_time);
  }
  double transit = swarm::realized_transit_s(r);
  if (std::isfinite(transit)) std::printf("first transit: %.1f s\n", transit);
  std::printf("total energy: %.3f kJ\n", r.energy.total() / 1000.0);
  std::printf("outputs: %s\n", s.out_dir.c_str());
  return r.complete ? 0 : 2;
}

int cmd_sweep(const CommonArgs& args) {
  swarm::Scenario s = load(args);
  auto rows = swarm::sweep_splits(s);
  std::filesystem::create_directories(s.out_dir);
  swarm::write_file(s.out_dir + "/sweep.csv", swarm::sweep_csv(rows));
  std::printf("k_left  k_right  time_s\n");
  for (const auto& row : rows)
    std::printf("%6d  %7d  %s\n", row.k_left, row.k_right, swarm::fmt6(row.time_s).c_str());
  const auto& best = rows[swarm::sweep_argmin(rows)];
  std::printf("best split: %d left / %d right (%.1f s)\n", best.k_left, best.k_right,
              best.time_s);
  std::printf("outputs: %s/sweep.csv\n", s.out_dir.c_str());
  return 0;
}

int cmd_compare(const CommonArgs& args) {
  swarm::Scenario s = load(args);
  auto c = swarm::compare_baseline(s);
  std::filesystem::create_directories(s.out_dir);
  swarm::write_file(s.out_dir + "/compare.csv", swarm::compare_csv(c));
  swarm::emit_run(c.optimized, s, s.out_dir + "/optimized");
  swarm::emit_run(c.baseline, s, s.out_dir + "/baseline");
  std::printf("mission energy: optimized %.3f kJ, nearest-lane %.3f kJ\n",
              c.optimized_energy_J / 1000.0, c.baseline_energy_J / 1000.0);
  std::printf("mission time: optimized %.1f s, nearest-lane %.1f s\n",
              c.optimized.duration_s(), c.baseline.duration_s());
  if (c.optimized_transit_energy_J > 0.0)
    std::printf("transit energy: optimized %.3f kJ, nearest-lane %.3f kJ\n",
                c.optimized_transit_energy_J / 1000.0, c.baseline_transit_energy_J / 1000.0);
  std::printf("energy saved by optimized split: %.1f%%\n", c.saving_total_pct);
  std::printf("outputs: %s\n", s.out_dir.c_str());
  return (c.optimized.complete && c.baseline.complete) ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Swarm formation / obstacle transit simulator"};
  app.require_subcommand(1);

  CommonArgs run_args, sweep_args, compare_args;
  std::string policy = "optimized";

  CLI::App* run = app.add_subcommand("run", "Simulate one mission and emit CSV traces");
  add_common(run, run_args);
  run->add_option("--policy", policy, "Split policy: optimized or nearest")
      ->check(CLI::IsMember({"optimized", "nearest"}));

  CLI::App* sweep = app.add_subcommand("sweep", "Force every left/right split and record times");
  add_common(sweep, sweep_args);

  CLI::App* compare =
      app.add_subcommand("compare", "Run optimized vs nearest-lane policy and compare energy");
  add_common(compare, compare_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_args, policy);
    if (sweep->parsed()) return cmd_sweep(sweep_args);
    if (compare->parsed()) return cmd_compare(compare_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
