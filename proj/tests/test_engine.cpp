#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "swarm/experiment.hpp"
#include "swarm/scenario.hpp"

using namespace swarm;
using Catch::Approx;

namespace {

std::vector<Phase> compressed_phases(const RunResult& r, int agent_id) {
  std::vector<Phase> out;
  for (const auto& row : r.trace) {
    if (row.agent_id != agent_id) continue;
    if (out.empty() || out.back() != row.phase) out.push_back(row.phase);
  }
  return out;
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

// Every agent parked within the goal radius of its own slot, slots used
// exactly once.
void check_goal_placement(const RunResult& r, const SwarmConfig& cfg) {
  MissionFrame frame(cfg.start_anchor, cfg.goal);
  std::vector<Vec2> slots;
  for (const auto& s : cfg.formation.slots)
    slots.push_back(cfg.goal + frame.from_local(s.x, s.y));
  std::set<size_t> used;
  for (const auto& a : r.agents) {
    size_t best = 0;
    double best_d = distance(a.pos, slots[0]);
    for (size_t i = 1; i < slots.size(); ++i) {
      double d = distance(a.pos, slots[i]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    CHECK(best_d <= cfg.goal_radius());
    CHECK(used.insert(best).second);
  }
}

Scenario two_block_row() {
  Scenario s;
  s.cfg.formation = nested_v_formation(s.cfg.n_agents, 4.0);
  s.cfg.goal = {0.0, 140.0};
  s.obstacles = {Obstacle(1, {-6.0, 60.0}, 4.0, 2.0),
                 Obstacle(2, {5.0, 60.0}, 4.0, 2.0)};  // lateral gap 3, too narrow
  return s;
}

}  // namespace

TEST_CASE("centered mission runs to completion") {
  Scenario s = load_scenario("scenarios/centered.json");
  RunResult r = Engine(s).run();

  REQUIRE(r.complete);
  CHECK(r.final_phase == Phase::Formation);
  CHECK(r.duration_s() < s.cfg.time_budget);
  CHECK(r.trace.size() == r.metrics.size() * 8);

  SECTION("phases run formation, split transit, reformation, formation") {
    std::vector<Phase> want{Phase::Formation, Phase::Disturbance, Phase::Convergence,
                            Phase::Formation};
    for (int id = 0; id < 8; ++id) CHECK(compressed_phases(r, id) == want);
  }
  SECTION("one grouping event with a balanced split") {
    REQUIRE(r.events.size() == 1);
    const auto& ev = r.events[0];
    CHECK(ev.parent_tag == "N");
    CHECK(ev.tags == std::vector<std::string>{"N1", "N2"});
    CHECK(ev.obstacle_ids == std::vector<int>{1});
    CHECK(ev.sizes == std::vector<int>{4, 4});
    REQUIRE(ev.leaders.size() == 2);
    CHECK(ev.leaders.count("N1") == 1);
    CHECK(ev.leaders.count("N2") == 1);
    CHECK_FALSE(r.leader_change_ticks.empty());
  }
  SECTION("the transit record closes and matches its prediction") {
    REQUIRE(r.transits.size() == 1);
    const auto& t = r.transits[0];
    REQUIRE(t.closed());
    CHECK(t.members.size() == 8);
    CHECK(t.center_along == Approx(60.0));
    CHECK(t.pass_tick >= t.plan_tick);
    CHECK(realized_transit_s(r) == Approx(t.duration_s(r.dt)));
    CHECK(t.duration_s(r.dt) == r.events[0].predicted_time);
  }
  SECTION("nobody enters a block and nobody violates separation") {
    CHECK(min_obstacle_clearance(r, s.obstacles) >= 0.0);
    CHECK(min_pair_distance(r) >= s.cfg.dist_safe);
  }
  SECTION("agents end on distinct goal slots") {
    check_goal_placement(r, s.cfg);
  }
  SECTION("energy is accounted per agent") {
    CHECK(r.energy.per_agent.size() == 8);
    CHECK(r.energy.total() > 0.0);
    for (double e : r.energy.per_agent) CHECK(e > 0.0);
  }
  SECTION("formation rows carry no group tag, transit rows carry one") {
    bool saw_plain = false, saw_tagged = false;
    for (const auto& row : r.trace) {
      if (row.phase == Phase::Formation && row.tick == 0) {
        CHECK(row.group == "-");
        saw_plain = true;
      }
      if (row.phase == Phase::Disturbance) {
        CHECK((row.group == "N1" || row.group == "N2"));
        saw_tagged = true;
      }
    }
    CHECK(saw_plain);
    CHECK(saw_tagged);
  }
}

TEST_CASE("runs are deterministic") {
  Scenario s = load_scenario("scenarios/centered.json");
  RunResult a = Engine(s).run();
  RunResult b = Engine(s).run();
  CHECK(positions_csv(a) == positions_csv(b));
  CHECK(metrics_csv(a) == metrics_csv(b));
  CHECK(energy_csv(a) == energy_csv(b));
}

TEST_CASE("a mirrored scenario runs as an exact reflection") {
  Scenario s = load_scenario("scenarios/centered.json");
  Scenario m = s;
  mirror_scenario(m.cfg, m.obstacles);

  RunResult r = Engine(s).run();
  RunResult rm = Engine(m).run();

  REQUIRE(r.trace.size() == rm.trace.size());
  for (size_t i = 0; i < r.trace.size(); ++i) {
    const auto& a = r.trace[i];
    const auto& b = rm.trace[i];
    REQUIRE(a.tick == b.tick);
    REQUIRE(a.agent_id == b.agent_id);
    if (b.x != -a.x || b.y != a.y || b.speed != a.speed) {
      INFO("tick " << a.tick << " agent " << a.agent_id);
      CHECK(b.x == -a.x);
      CHECK(b.y == a.y);
      CHECK(b.speed == a.speed);
      break;
    }
    REQUIRE(a.phase == b.phase);
  }
  CHECK(rm.energy.total() == r.energy.total());
  CHECK(rm.ticks == r.ticks);
}

TEST_CASE("shifted-block scenarios mirror each other") {
  Scenario left = load_scenario("scenarios/left_shifted.json");
  Scenario right = load_scenario("scenarios/right_shifted.json");
  Scenario mirrored = left;
  mirror_scenario(mirrored.cfg, mirrored.obstacles);
  CHECK(mirrored.cfg == right.cfg);
  REQUIRE(mirrored.obstacles.size() == right.obstacles.size());
  CHECK(mirrored.obstacles[0] == right.obstacles[0]);
}

TEST_CASE("split sweep over the shifted block") {
  Scenario s = load_scenario("scenarios/left_shifted.json");
  auto rows = sweep_splits(s);
  REQUIRE(rows.size() == 9);
  for (const auto& row : rows) {
    CHECK(row.k_left + row.k_right == 8);
    REQUIRE(std::isfinite(row.time_s));
    CHECK(row.time_s > 0.0);
    CHECK(row.time_s == Approx(std::round(row.time_s / s.cfg.dt) * s.cfg.dt));
  }
  SECTION("more agents go around the short side") {
    // block sits right of the swarm axis, so the left detour is shorter
    const auto& best = rows[sweep_argmin(rows)];
    CHECK(best.k_left > best.k_right);
  }
  SECTION("the free-running engine picks the sweep winner") {
    RunResult free_run = Engine(s).run();
    REQUIRE_FALSE(free_run.events.empty());
    const auto& best = rows[sweep_argmin(rows)];
    CHECK(free_run.events[0].sizes ==
          std::vector<int>{best.k_left, best.k_right});
  }
}

TEST_CASE("optimized splitting beats nearest-lane routing on energy") {
  Scenario s = load_scenario("scenarios/left_shifted.json");
  CompareResult c = compare_baseline(s);
  REQUIRE(c.optimized.complete);
  REQUIRE(c.baseline.complete);
  CHECK(c.optimized_energy_J < c.baseline_energy_J);
  CHECK(c.saving_total_pct > 0.0);
  CHECK(c.optimized_transit_s <= c.baseline_transit_s);
  SECTION("safety floors hold under both policies") {
    CHECK(min_obstacle_clearance(c.optimized, s.obstacles) >= 0.0);
    CHECK(min_obstacle_clearance(c.baseline, s.obstacles) >= 0.0);
    CHECK(min_pair_distance(c.optimized) >= s.cfg.dist_safe);
    CHECK(min_pair_distance(c.baseline) >= s.cfg.dist_safe);
  }
  SECTION("the comparison table carries both rows") {
    std::string csv = compare_csv(c);
    CHECK(csv.find("optimized,1,") != std::string::npos);
    CHECK(csv.find("nearest_lane,1,") != std::string::npos);
  }
}

TEST_CASE("forest mission splits again while still in transit") {
  Scenario s = load_scenario("scenarios/forest.json");
  RunResult r = Engine(s).run();

  REQUIRE(r.complete);
  CHECK(r.final_phase == Phase::Formation);
  REQUIRE(r.events.size() >= 3);
  CHECK(r.events[0].parent_tag == "N");
  CHECK(r.events[0].obstacle_ids == std::vector<int>{1});

  SECTION("later splits nest under the first ones") {
    bool nested_left = false, nested_right = false;
    for (const auto& ev : r.events) {
      if (ev.parent_tag == "N1") {
        nested_left = true;
        // Detection is range-gated, so the trigger set can be either second-row
        // block first; it must never re-list the already-passed first row.
        CHECK_FALSE(ev.obstacle_ids.empty());
        for (int oid : ev.obstacle_ids) CHECK((oid == 2 || oid == 3));
        for (const auto& tag : ev.tags) {
          CHECK(tag.size() == 3);
          CHECK(tag.rfind("N1", 0) == 0);
        }
      }
      if (ev.parent_tag == "N2") nested_right = true;
    }
    CHECK(nested_left);
    CHECK(nested_right);
  }
  SECTION("one continuous transit phase covers both block rows") {
    std::vector<Phase> want{Phase::Formation, Phase::Disturbance, Phase::Convergence,
                            Phase::Formation};
    for (int id = 0; id < 8; ++id) CHECK(compressed_phases(r, id) == want);
  }
  SECTION("safety floors hold through both rows") {
    CHECK(min_obstacle_clearance(r, s.obstacles) >= 0.0);
    CHECK(min_pair_distance(r) >= s.cfg.dist_safe);
  }
  SECTION("agents end on distinct goal slots") {
    check_goal_placement(r, s.cfg);
  }
}

TEST_CASE("forced splits through a blocked gap are infeasible") {
  Scenario s = two_block_row();
  SECTION("forcing everyone through the narrow gap throws") {
    EngineOptions opts;
    opts.forced_first_split = {0, 8, 0};
    Engine e(s, opts);
    CHECK_THROWS_AS(e.run(), InfeasibleSplitError);
  }
  SECTION("the free-running engine avoids the gap and completes") {
    RunResult r = Engine(s).run();
    REQUIRE(r.complete);
    REQUIRE_FALSE(r.events.empty());
    const auto& ev = r.events[0];
    CHECK(ev.tags == std::vector<std::string>{"N1", "N2", "N3"});
    REQUIRE(ev.sizes.size() == 3);
    CHECK(ev.sizes[1] == 0);
    CHECK(ev.sizes[0] + ev.sizes[2] == 8);
    CHECK(min_obstacle_clearance(r, s.obstacles) >= 0.0);
  }
}

TEST_CASE("engine constructor validation") {
  Scenario s = load_scenario("scenarios/centered.json");
  SECTION("forced splits require the optimized policy") {
    EngineOptions opts;
    opts.policy = Policy::NearestLane;
    opts.forced_first_split = {4, 4};
    CHECK_THROWS_AS(Engine(s, opts), std::invalid_argument);
  }
  SECTION("a forced split with the wrong part count fails at the event") {
    EngineOptions opts;
    opts.forced_first_split = {4, 4, 0};
    Engine e(s, opts);
    CHECK_THROWS_AS(e.run(), std::invalid_argument);
  }
  SECTION("one agent is not a swarm") {
    Scenario tiny = s;
    tiny.cfg.n_agents = 1;
    tiny.cfg.formation = nested_v_formation(1, 4.0);
    CHECK_THROWS_AS(Engine(tiny), std::invalid_argument);
  }
}
