#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarm/engine.hpp"
#include "swarm/scenario.hpp"

namespace swarm {

// All CSV numbers are printed with six fixed decimals so reruns are
// byte-comparable; infinities print as "inf".
inline std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string positions_csv(const RunResult& r) {
  std::ostringstream out;
  out << "tick,time_s,agent_id,x,y,speed,phase,group\n";
  for (const auto& row : r.trace)
    out << row.tick << ',' << fmt6(static_cast<double>(row.tick) * r.dt) << ','
        << row.agent_id << ',' << fmt6(row.x) << ',' << fmt6(row.y) << ','
        << fmt6(row.speed) << ',' << phase_name(row.phase) << ',' << row.group << '\n';
  return out.str();
}

inline std::string metrics_csv(const RunResult& r) {
  std::ostringstream out;
  out << "tick,time_s,mean_speed,std_speed,mean_nn_dist,std_nn_dist,min_pair_dist\n";
  for (const auto& m : r.metrics)
    out << m.tick << ',' << fmt6(static_cast<double>(m.tick) * r.dt) << ','
        << fmt6(m.mean_speed) << ',' << fmt6(m.std_speed) << ',' << fmt6(m.mean_nn_dist)
        << ',' << fmt6(m.std_nn_dist) << ',' << fmt6(m.min_pair_dist) << '\n';
  return out.str();
}

inline std::string energy_csv(const RunResult& r) {
  std::ostringstream out;
  out << "agent_id,energy_J\n";
  for (size_t i = 0; i < r.energy.per_agent.size(); ++i)
    out << i << ',' << fmt6(r.energy.per_agent[i]) << '\n';
  out << "total," << fmt6(r.energy.total()) << '\n';
  return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

// Writes positions.csv, metrics.csv, energy.csv and the resolved scenario
// echo into `dir`.
inline void emit_run(const RunResult& r, const Scenario& s, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir + "/positions.csv", positions_csv(r));
  write_file(dir + "/metrics.csv", metrics_csv(r));
  write_file(dir + "/energy.csv", energy_csv(r));
  write_file(dir + "/scenario_echo.json", scenario_to_json(s).dump(2) + "\n");
}

struct SweepRow {
  int k_left = 0;
  int k_right = 0;
  double time_s = std::numeric_limits<double>::infinity();
};

// Realized transit time of the first grouping event in a run, or +inf when
// the run never closed it.
inline double realized_transit_s(const RunResult& r) {
  if (r.transits.empty() || !r.transits.front().closed())
    return std::numeric_limits<double>::infinity();
  return r.transits.front().duration_s(r.dt);
}

// Forces every left/right split of the swarm past a single-obstacle
// scenario's block and reports the realized transit times.
inline std::vector<SweepRow> sweep_splits(const Scenario& s) {
  if (s.obstacles.size() != 1)
    throw std::invalid_argument("sweep_splits: needs exactly one obstacle");
  std::vector<SweepRow> rows;
  for (int k = 0; k <= s.cfg.n_agents; ++k) {
    SweepRow row;
    row.k_left = k;
    row.k_right = s.cfg.n_agents - k;
    try {
      EngineOptions opts;
      opts.forced_first_split = {row.k_left, row.k_right};
      row.time_s = realized_transit_s(Engine(s, opts).run());
    } catch (const InfeasibleSplitError&) {
      // keeps the +inf marker
    }
    rows.push_back(row);
  }
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "k_left,k_right,time_s\n";
  for (const auto& r : rows)
    out << r.k_left << ',' << r.k_right << ',' << fmt6(r.time_s) << '\n';
  return out.str();
}

// Winning row of a sweep: fastest, ties to the more balanced split, then to
// the smaller k_left. Mirrors the selection rule the live engine applies.
inline size_t sweep_argmin(const std::vector<SweepRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("sweep_argmin: no rows");
  size_t best = 0;
  for (size_t i = 1; i < rows.size(); ++i) {
    const auto& a = rows[i];
    const auto& b = rows[best];
    int bal_a = std::abs(a.k_left - a.k_right);
    int bal_b = std::abs(b.k_left - b.k_right);
    if (a.time_s < b.time_s || (a.time_s == b.time_s && bal_a < bal_b)) best = i;
  }
  return best;
}

struct CompareResult {
  RunResult optimized;
  RunResult baseline;
  double optimized_energy_J = 0.0;
  double baseline_energy_J = 0.0;
  double optimized_transit_s = 0.0;
  double baseline_transit_s = 0.0;
  double optimized_transit_energy_J = 0.0;
  double baseline_transit_energy_J = 0.0;
  double saving_total_pct = 0.0;    // mission energy saved by optimized vs baseline
  double saving_transit_pct = 0.0;  // same, transit window only
};

// Energy spent during the first transit window (plan tick through pass tick),
// reconstructed from the trace speeds.
inline double transit_energy_J(const RunResult& r, const PowerModel& model) {
  if (r.transits.empty() || !r.transits.front().closed()) return 0.0;
  const auto& t = r.transits.front();
  double e = 0.0;
  for (const auto& row : r.trace)
    if (row.tick >= t.plan_tick && row.tick <= t.pass_tick)
      e += model.power_at(row.speed) * r.dt;
  return e;
}

// Runs the scenario under both split policies and compares times and energy.
inline CompareResult compare_baseline(const Scenario& s) {
  CompareResult c;
  {
    EngineOptions opts;
    opts.policy = Policy::Optimized;
    c.optimized = Engine(s, opts).run();
  }
  {
    EngineOptions opts;
    opts.policy = Policy::NearestLane;
    c.baseline = Engine(s, opts).run();
  }
  c.optimized_energy_J = c.optimized.energy.total();
  c.baseline_energy_J = c.baseline.energy.total();
  c.optimized_transit_s = realized_transit_s(c.optimized);
  c.baseline_transit_s = realized_transit_s(c.baseline);
  c.optimized_transit_energy_J = transit_energy_J(c.optimized, s.power);
  c.baseline_transit_energy_J = transit_energy_J(c.baseline, s.power);
  c.saving_total_pct = energy_saving_percent(c.optimized_energy_J, c.baseline_energy_J);
  if (c.optimized_transit_energy_J > 0.0)
    c.saving_transit_pct =
        energy_saving_percent(c.optimized_transit_energy_J, c.baseline_transit_energy_J);
  return c;
}

inline std::string compare_csv(const CompareResult& c) {
  std::ostringstream out;
  out << "policy,complete,mission_time_s,transit_time_s,mission_energy_J,transit_energy_J\n";
  out << "optimized," << (c.optimized.complete ? 1 : 0) << ','
      << fmt6(c.optimized.duration_s()) << ',' << fmt6(c.optimized_transit_s) << ','
      << fmt6(c.optimized_energy_J) << ',' << fmt6(c.optimized_transit_energy_J) << '\n';
  out << "nearest_lane," << (c.baseline.complete ? 1 : 0) << ','
      << fmt6(c.baseline.duration_s()) << ',' << fmt6(c.baseline_transit_s) << ','
      << fmt6(c.baseline_energy_J) << ',' << fmt6(c.baseline_transit_energy_J) << '\n';
  return out.str();
}

}  // namespace swarm
