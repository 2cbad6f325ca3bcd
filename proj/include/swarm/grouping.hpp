#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarm/avoidance.hpp"
#include "swarm/kinematics.hpp"
#include "swarm/vec2.hpp"
#include "swarm/world.hpp"

namespace swarm {

// Number of parts the swarm splits into around a row of `block_count`
// merged blocks: one per corridor, i.e. blocks + 1.
inline int population_factor(int block_count) {
  if (block_count < 0) throw std::invalid_argument("population_factor: negative block count");
  return block_count + 1;
}

// All ways to spread n agents over r ordered routes (empty parts allowed),
// in lexicographically ascending order. r is small (routes = blocks + 1), so
// plain enumeration is fine: C(n + r - 1, r - 1) candidates.
inline std::vector<std::vector<int>> enumerate_splits(int n_agents, int n_routes) {
  if (n_agents < 1) throw std::invalid_argument("enumerate_splits: need at least one agent");
  if (n_routes < 1) throw std::invalid_argument("enumerate_splits: need at least one route");
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<size_t>(n_routes), 0);
  auto rec = [&](auto&& self, int pos, int left) -> void {
    if (pos == n_routes - 1) {
      cur[static_cast<size_t>(pos)] = left;
      out.push_back(cur);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      cur[static_cast<size_t>(pos)] = k;
      self(self, pos + 1, left - k);
    }
  };
  rec(rec, 0, n_agents);
  return out;
}

// Agent ids ordered left to right across the mission direction; ties (never
// hit by the shipped formations, whose laterals are distinct) go to the
// lower id.
inline std::vector<int> lateral_order(const std::vector<AgentState>& members,
                                      const MissionFrame& frame) {
  std::vector<std::pair<double, int>> keyed;
  keyed.reserve(members.size());
  for (const auto& a : members) keyed.emplace_back(frame.lat(a.pos), a.id);
  std::sort(keyed.begin(), keyed.end());
  std::vector<int> ids;
  ids.reserve(keyed.size());
  for (const auto& [_, id] : keyed) ids.push_back(id);
  return ids;
}

// Route assignment for one size split: the leftmost `sizes[0]` agents take
// route 0, the next block route 1, and so on. Keeping blocks contiguous in
// lateral order means no two agents cross paths on their way to the lanes.
inline std::map<int, int> contiguous_assignment(const std::vector<AgentState>& members,
                                                const MissionFrame& frame,
                                                const std::vector<int>& sizes) {
  int total = 0;
  for (int s : sizes) {
    if (s < 0) throw std::invalid_argument("contiguous_assignment: negative part size");
    total += s;
  }
  if (total != static_cast<int>(members.size()))
    throw std::invalid_argument("contiguous_assignment: sizes do not sum to member count");
  std::vector<int> order = lateral_order(members, frame);
  std::map<int, int> route_of;
  size_t at = 0;
  for (size_t r = 0; r < sizes.size(); ++r)
    for (int k = 0; k < sizes[r]; ++k) route_of[order[at++]] = static_cast<int>(r);
  return route_of;
}

// Splits each agent off to the route whose lane is laterally nearest to it
// (ties to the lower route index). Nearest-lane choice over laterally
// sorted agents and lanes is automatically contiguous.
inline std::map<int, int> nearest_lane_assignment(const std::vector<AgentState>& members,
                                                  const std::vector<Route>& routes,
                                                  const MissionFrame& frame) {
  if (routes.empty()) throw std::invalid_argument("nearest_lane_assignment: no routes");
  std::map<int, int> route_of;
  for (const auto& a : members) {
    double lat = frame.lat(a.pos);
    int best = 0;
    double best_d = std::abs(lat - routes[0].lane_lat);
    for (size_t r = 1; r < routes.size(); ++r) {
      double d = std::abs(lat - routes[r].lane_lat);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(r);
      }
    }
    route_of[a.id] = best;
  }
  return route_of;
}

inline std::vector<int> sizes_of(const std::map<int, int>& route_of, int n_routes) {
  std::vector<int> sizes(static_cast<size_t>(n_routes), 0);
  for (const auto& [_, r] : route_of) ++sizes.at(static_cast<size_t>(r));
  return sizes;
}

// Simulated transit time for one candidate split, in seconds: the members
// are copied, routed, and stepped with the exact controller and integrator
// the live run uses, until the last copy passes the block row's center line.
// Infeasible candidates (agents on a blocked gap) and candidates that blow
// the time budget (10x the unobstructed transit) report +inf.
inline double predict_transit_time(const std::vector<AgentState>& members,
                                   const std::map<int, int>& route_of,
                                   const std::vector<Route>& routes,
                                   const std::vector<Obstacle>& blocks,
                                   const MissionFrame& frame, const Vec2& goal,
                                   const SwarmConfig& cfg) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double clearance = cfg.dist_safe + cfg.clearance_margin;
  for (const auto& [id, r] : route_of)
    if (!route_feasible(routes.at(static_cast<size_t>(r)), clearance)) return inf;

  double front = routes.front().front_along, back = routes.front().back_along;
  for (const auto& r : routes) {
    front = std::min(front, r.front_along);
    back = std::max(back, r.back_along);
  }
  double center_along = (front + back) / 2.0;

  std::vector<AgentState> sim = members;
  std::vector<int> ids;
  ids.reserve(sim.size());
  for (const auto& a : sim) ids.push_back(a.id);

  DisturbanceController ctl(frame, goal);
  ctl.plan(ids, routes, route_of, sim, cfg);

  double worst_gap = 0.0;
  for (const auto& a : sim)
    worst_gap = std::max(worst_gap, center_along - frame.along(a.pos));
  double free_time = std::max(worst_gap, 0.0) / cfg.nominal_speed;
  long budget = static_cast<long>(std::ceil(std::max(free_time, cfg.dt) * 10.0 / cfg.dt));

  auto all_past = [&]() {
    for (const auto& a : sim)
      if (frame.along(a.pos) <= center_along) return false;
    return true;
  };

  long steps = 0;
  std::vector<MotionCommand> cmds;
  cmds.reserve(sim.size());
  do {
    if (steps >= budget) return inf;
    cmds.clear();
    for (const auto& a : sim) cmds.push_back(ctl.disturbance_command(a, sim, blocks, cfg));
    for (size_t i = 0; i < sim.size(); ++i) step(sim[i], cmds[i], cfg);
    ctl.after_step(sim);
    ++steps;
  } while (!all_past());
  return static_cast<double>(steps) * cfg.dt;
}

struct SplitCandidate {
  std::vector<int> sizes;
  double predicted_time = std::numeric_limits<double>::infinity();
};

// Index of the winning candidate: minimal predicted time, ties to the more
// balanced split (smaller max-min part size), then to the lower enumeration
// index. Predicted times are exact tick multiples from the same simulation,
// so equal candidates compare exactly equal.
inline size_t select_plan(const std::vector<SplitCandidate>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("select_plan: no candidates");
  auto imbalance = [](const std::vector<int>& sizes) {
    auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
    return *hi - *lo;
  };
  size_t best = 0;
  for (size_t i = 1; i < candidates.size(); ++i) {
    const auto& a = candidates[i];
    const auto& b = candidates[best];
    if (a.predicted_time < b.predicted_time ||
        (a.predicted_time == b.predicted_time &&
         imbalance(a.sizes) < imbalance(b.sizes)))
      best = i;
  }
  return best;
}

// Leader per part: the member farthest along the mission direction, ties to
// the lower id. Parts are keyed by tag; empty parts get no leader.
inline std::map<std::string, int> nominate_leaders(
    const std::map<std::string, std::vector<int>>& members_by_tag,
    const std::vector<AgentState>& agents, const MissionFrame& frame) {
  auto find_agent = [&](int id) -> const AgentState& {
    for (const auto& a : agents)
      if (a.id == id) return a;
    throw std::logic_error("nominate_leaders: unknown agent id");
  };
  std::map<std::string, int> leaders;
  for (const auto& [tag, ids] : members_by_tag) {
    if (ids.empty()) continue;
    int best = ids[0];
    double best_along = frame.along(find_agent(best).pos);
    for (size_t i = 1; i < ids.size(); ++i) {
      double al = frame.along(find_agent(ids[i]).pos);
      if (al > best_along || (al == best_along && ids[i] < best)) {
        best_along = al;
        best = ids[i];
      }
    }
    leaders[tag] = best;
  }
  return leaders;
}

}  // namespace swarm
