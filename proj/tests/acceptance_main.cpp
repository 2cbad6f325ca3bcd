// Acceptance suite: end-to-end checks of the shipped behavior, one line of
// output per criterion. Exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "swarm/experiment.hpp"
#include "swarm/scenario.hpp"

#include "oracles.hpp"

using namespace swarm;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

double min_obstacle_clearance(const RunResult& r, const std::vector<Obstacle>& obstacles) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& row : r.trace)
    for (const auto& o : obstacles)
      worst = std::min(worst, o.signed_clearance({row.x, row.y}));
  return worst;
}

double min_pair_distance(const RunResult& r) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& m : r.metrics) worst = std::min(worst, m.min_pair_dist);
  return worst;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// 1. Split sweeps: centered block favors the balanced split, transit time is
// unimodal in the split, a shifted block pulls the majority to the short
// side, the mirrored scenario reproduces the sweep exactly reversed, and the
// best centered transit stays under 30 s.
bool criterion1(std::string& detail) {
  Scenario centered = load_scenario("scenarios/centered.json");
  auto rows = sweep_splits(centered);
  std::vector<double> times;
  for (const auto& r : rows) {
    if (!std::isfinite(r.time_s)) {
      detail = "centered split " + std::to_string(r.k_left) + " never transits";
      return false;
    }
    times.push_back(r.time_s);
  }
  const auto& best = rows[sweep_argmin(rows)];
  if (best.k_left != 4 || best.k_right != 4) {
    detail = "centered optimum at (" + std::to_string(best.k_left) + "," +
             std::to_string(best.k_right) + "), expected (4,4)";
    return false;
  }
  if (!oracle::is_unimodal(times, centered.cfg.dt + 1e-12)) {
    detail = "centered sweep is not unimodal within one tick";
    return false;
  }
  if (!(times[4] <= 30.0)) {
    detail = "best centered transit " + fmt(times[4]) + " s, expected <= 30 s";
    return false;
  }

  Scenario left = load_scenario("scenarios/left_shifted.json");
  auto lrows = sweep_splits(left);
  const auto& lbest = lrows[sweep_argmin(lrows)];
  if (!(lbest.k_left > lbest.k_right)) {
    detail = "shifted block optimum (" + std::to_string(lbest.k_left) + "," +
             std::to_string(lbest.k_right) + ") does not favor the short side";
    return false;
  }

  Scenario right = load_scenario("scenarios/right_shifted.json");
  auto rrows = sweep_splits(right);
  for (size_t k = 0; k < rrows.size(); ++k)
    if (rrows[k].time_s != lrows[rrows.size() - 1 - k].time_s) {
      detail = "mirrored sweep differs at k=" + std::to_string(k) + ": " +
               fmt(rrows[k].time_s) + " vs " + fmt(lrows[rrows.size() - 1 - k].time_s);
      return false;
    }
  const auto& rbest = rrows[sweep_argmin(rrows)];
  if (!(rbest.k_right > rbest.k_left)) {
    detail = "mirrored optimum does not favor the mirrored short side";
    return false;
  }
  detail = "centered best (4,4) at " + fmt(times[4]) + " s, shifted best (" +
           std::to_string(lbest.k_left) + "," + std::to_string(lbest.k_right) +
           "), mirror sweep exact";
  return true;
}

// 2. The congestion-aware split spends strictly less mission energy than
// nearest-lane routing on the shifted block, with both policies completing.
bool criterion2(std::string& detail) {
  auto t0 = std::chrono::steady_clock::now();
  Scenario s = load_scenario("scenarios/left_shifted.json");
  CompareResult c = compare_baseline(s);
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!c.optimized.complete || !c.baseline.complete) {
    detail = "a policy failed to complete the mission";
    return false;
  }
  if (!(c.optimized_energy_J < c.baseline_energy_J)) {
    detail = "optimized " + fmt(c.optimized_energy_J) + " J is not below baseline " +
             fmt(c.baseline_energy_J) + " J";
    return false;
  }
  if (!(wall < 10.0)) {
    detail = "comparison took " + fmt(wall) + " s of wall time, expected < 10 s";
    return false;
  }
  detail = fmt(c.optimized_energy_J / 1000.0) + " kJ vs " +
           fmt(c.baseline_energy_J / 1000.0) + " kJ, saving " +
           fmt(c.saving_total_pct) + "%";
  return true;
}

// 3. On randomized single-block scenarios the planner's simulated transit
// time equals the realized transit time exactly for every forced split, and
// the free-running engine picks exactly the split a full sweep would pick.
bool criterion3(std::string& detail) {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> cx(-6.0, 6.0), hw(4.0, 8.0), hd(1.0, 3.0);
  int transits = 0;
  for (int i = 0; i < 60; ++i) {
    Scenario sc;
    sc.cfg.formation = nested_v_formation(sc.cfg.n_agents, 4.0);
    sc.cfg.goal = {0.0, 140.0};
    sc.obstacles = {Obstacle(1, {cx(rng), 60.0}, hw(rng), hd(rng))};

    std::vector<double> realized(9, 0.0);
    for (int k = 0; k <= 8; ++k) {
      EngineOptions opts;
      opts.forced_first_split = {k, 8 - k};
      RunResult r = Engine(sc, opts).run();
      if (r.events.empty() || r.transits.empty() || !r.transits[0].closed()) {
        detail = "scenario " + std::to_string(i) + " split " + std::to_string(k) +
                 " never closed its transit";
        return false;
      }
      double predicted = r.events[0].predicted_time;
      double real = r.transits[0].duration_s(r.dt);
      if (predicted != real) {
        detail = "scenario " + std::to_string(i) + " split " + std::to_string(k) +
                 ": predicted " + fmt(predicted) + " s, realized " + fmt(real) + " s";
        return false;
      }
      realized[static_cast<size_t>(k)] = real;
      ++transits;
    }
    int kbest = oracle::sweep_best_k(realized, 8, 0.0);
    RunResult free_run = Engine(sc).run();
    if (free_run.events.empty() ||
        free_run.events[0].sizes != std::vector<int>{kbest, 8 - kbest}) {
      detail = "scenario " + std::to_string(i) + ": free run chose a split other than (" +
               std::to_string(kbest) + "," + std::to_string(8 - kbest) + ")";
      return false;
    }
  }
  detail = std::to_string(transits) + " forced transits predicted exactly, 60 free runs optimal";
  return true;
}

// 4. The reformation assignment is optimal: on random cost matrices it
// reproduces the brute-force optimum and the brute-force lexicographic
// tie-break.
bool criterion4(std::string& detail) {
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> val(0.0, 100.0);
  std::uniform_int_distribution<int> dim(2, 8);
  for (int trial = 0; trial < 120; ++trial) {
    size_t n = static_cast<size_t>(dim(rng));
    std::vector<std::vector<double>> cost(n, std::vector<double>(n));
    for (auto& row : cost)
      for (auto& c : row) c = val(rng);
    auto got = solve_assignment(cost);
    double want = oracle::assignment_cost_brute(cost);
    double eps = 1e-9 * std::max(1.0, std::abs(want));
    if (std::abs(got.cost - want) > eps) {
      detail = "trial " + std::to_string(trial) + ": cost " + fmt(got.cost) +
               " vs optimum " + fmt(want);
      return false;
    }
    if (got.target_of != oracle::assignment_lex_brute(cost, eps)) {
      detail = "trial " + std::to_string(trial) + ": tie-break differs from brute force";
      return false;
    }
  }
  detail = "120 random matrices up to 8x8 match brute force";
  return true;
}

// 5. Safety floors: across all shipped scenarios and both policies, no agent
// ever enters a block and no pair ever closes below the separation floor.
bool criterion5(std::string& detail) {
  const char* files[] = {"scenarios/centered.json", "scenarios/left_shifted.json",
                         "scenarios/forest.json"};
  for (const char* f : files) {
    Scenario s = load_scenario(f);
    for (Policy p : {Policy::Optimized, Policy::NearestLane}) {
      EngineOptions opts;
      opts.policy = p;
      RunResult r = Engine(s, opts).run();
      if (!r.complete) {
        detail = std::string(s.name) + ": run incomplete";
        return false;
      }
      double clear = min_obstacle_clearance(r, s.obstacles);
      if (!(clear >= 0.0)) {
        detail = s.name + ": an agent entered a block (clearance " + fmt(clear) + " m)";
        return false;
      }
      double pair = min_pair_distance(r);
      if (!(pair >= s.cfg.dist_safe)) {
        detail = s.name + ": pair distance fell to " + fmt(pair) + " m, floor " +
                 fmt(s.cfg.dist_safe) + " m";
        return false;
      }
    }
  }
  detail = "3 scenarios x 2 policies, clearance >= 0 and separation >= floor throughout";
  return true;
}

// 6. Reformation accuracy on the two-row scenario: at the moment convergence
// is declared every agent sits within the convergence tolerance of its
// assigned slot, and the final formation's mean nearest-neighbor distance is
// within 10% of the slot template's.
bool criterion6(std::string& detail) {
  Scenario s = load_scenario("scenarios/forest.json");
  RunResult r = Engine(s).run();
  if (!r.complete) {
    detail = "forest run incomplete";
    return false;
  }
  if (r.reform_slots.empty() || r.reform_slot_of.size() != r.agents.size()) {
    detail = "no reformation recorded";
    return false;
  }
  long t_conv = -1;
  for (const auto& row : r.trace)
    if (row.phase == Phase::Convergence) t_conv = std::max(t_conv, row.tick);
  if (t_conv < 0) {
    detail = "no convergence phase in the trace";
    return false;
  }
  double worst = 0.0;
  for (const auto& row : r.trace) {
    if (row.tick != t_conv) continue;
    const Vec2 slot = r.reform_slots[static_cast<size_t>(
        r.reform_slot_of[static_cast<size_t>(row.agent_id)])];
    worst = std::max(worst, distance({row.x, row.y}, slot));
  }
  if (!(worst <= s.cfg.converge_eps)) {
    detail = "slot error " + fmt(worst) + " m at convergence, tolerance " +
             fmt(s.cfg.converge_eps) + " m";
    return false;
  }

  double tmpl = 0.0;
  const auto& slots = s.cfg.formation.slots;
  for (size_t i = 0; i < slots.size(); ++i) {
    double nn = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < slots.size(); ++j)
      if (j != i) nn = std::min(nn, distance(slots[i], slots[j]));
    tmpl += nn;
  }
  tmpl /= static_cast<double>(slots.size());
  double got = r.metrics.back().mean_nn_dist;
  if (!(std::abs(got - tmpl) <= 0.10 * tmpl)) {
    detail = "final mean neighbor distance " + fmt(got) + " m vs template " + fmt(tmpl) + " m";
    return false;
  }
  detail = "slot error " + fmt(worst) + " m at convergence, final spacing " + fmt(got) +
           " m vs template " + fmt(tmpl) + " m";
  return true;
}

// 7. Model spot checks: stopping distance, impact time, the group count
// rule, placement energy against brute force, the energy ledger against a
// trace recomputation, and the power curve's sweet spot.
bool criterion7(std::string& detail) {
  auto sd = stopping_distance(10.0, 9.81, 0.3, 0.0);
  double want_braking = 100.0 / (2.0 * 9.81 * 0.3);
  if (std::abs(sd.braking - want_braking) > 1e-12 || std::abs(sd.braking - 16.9896) > 5e-4 ||
      sd.reaction != 0.0 || sd.total != sd.braking) {
    detail = "stopping distance " + fmt(sd.total) + " m, expected " + fmt(want_braking);
    return false;
  }
  if (danger_zone(sd.total, 2.0) != sd.total + 2.0) {
    detail = "danger zone is not stopping distance plus margin";
    return false;
  }
  if (time_to_impact(30.0, 10.0) != 3.0) {
    detail = "impact time " + fmt(time_to_impact(30.0, 10.0)) + " s, expected 3";
    return false;
  }
  if (population_factor(0) != 1 || population_factor(1) != 2 || population_factor(2) != 3) {
    detail = "group count rule broken";
    return false;
  }

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> val(-30.0, 30.0);
  std::vector<Vec2> pos, slots;
  for (int i = 0; i < 8; ++i) {
    pos.push_back({val(rng), val(rng)});
    slots.push_back({val(rng), val(rng)});
  }
  std::vector<std::vector<double>> cost(8, std::vector<double>(8));
  for (size_t i = 0; i < 8; ++i)
    for (size_t j = 0; j < 8; ++j) cost[i][j] = (pos[i] - slots[j]).norm_sq();
  auto best = solve_assignment(cost);
  double brute = oracle::assignment_cost_brute(cost);
  if (std::abs(best.cost - brute) > 1e-9 * std::max(1.0, brute) ||
      std::abs(tps_energy(pos, slots, best.target_of) - best.cost) > 1e-9) {
    detail = "placement energy disagrees with brute force";
    return false;
  }

  Scenario s = load_scenario("scenarios/centered.json");
  RunResult r = Engine(s).run();
  double recomputed = 0.0;
  for (const auto& row : r.trace)
    if (row.tick >= 1) recomputed += s.power.power_at(row.speed) * r.dt;
  if (std::abs(recomputed - r.energy.total()) > 1e-9 * std::max(1.0, recomputed)) {
    detail = "ledger " + fmt(r.energy.total()) + " J vs trace recomputation " +
             fmt(recomputed) + " J";
    return false;
  }

  PowerModel pm;
  if (pm.endurance_speed() != 10.0 || pm.power_at(10.0) != 170.0) {
    detail = "power curve minimum moved off 10 m/s";
    return false;
  }
  detail = "stopping 16.9896 m, impact 3 s, ledger matches trace, power minimum 170 W at 10 m/s";
  return true;
}

// 8. Determinism: identical scenarios produce byte-identical run artifacts
// and identical sweeps.
bool criterion8(std::string& detail) {
  Scenario s = load_scenario("scenarios/centered.json");
  RunResult a = Engine(s).run();
  RunResult b = Engine(s).run();
  emit_run(a, s, "build/acceptance_rerun_a");
  emit_run(b, s, "build/acceptance_rerun_b");
  for (const char* f : {"positions.csv", "metrics.csv", "energy.csv", "scenario_echo.json"}) {
    std::string fa = read_file(std::string("build/acceptance_rerun_a/") + f);
    std::string fb = read_file(std::string("build/acceptance_rerun_b/") + f);
    if (fa.empty() || fa != fb) {
      detail = std::string(f) + " differs between reruns";
      return false;
    }
  }
  Scenario left = load_scenario("scenarios/left_shifted.json");
  auto r1 = sweep_splits(left);
  auto r2 = sweep_splits(left);
  for (size_t k = 0; k < r1.size(); ++k)
    if (r1[k].time_s != r2[k].time_s) {
      detail = "sweep differs at k=" + std::to_string(k);
      return false;
    }
  detail = "rerun artifacts byte-identical, sweeps identical";
  return true;
}

}  // namespace

int main() {
  struct Crit {
    const char* name;
    bool (*fn)(std::string&);
  };
  const Crit crits[] = {
      {"split sweep shape and mirror symmetry", criterion1},
      {"energy saving over nearest-lane routing", criterion2},
      {"transit predictions match realized transits", criterion3},
      {"reformation assignment optimality", criterion4},
      {"separation and obstacle clearance floors", criterion5},
      {"reformation accuracy", criterion6},
      {"model formula spot checks", criterion7},
      {"deterministic rerun artifacts", criterion8},
  };
  int failures = 0;
  for (size_t i = 0; i < sizeof crits / sizeof crits[0]; ++i) {
    std::string detail;
    bool ok = false;
    try {
      ok = crits[i].fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %zu: %s - %s\n", ok ? "PASS" : "FAIL", i + 1,
                crits[i].name, detail.c_str());
    if (!ok) ++failures;
  }
  return failures;
}
