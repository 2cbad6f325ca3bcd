#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "swarm/vec2.hpp"
#include "swarm/world.hpp"

namespace swarm {

namespace detail {

// Minimal cost of a perfect matching on a square cost matrix, potentials
// method with shortest augmenting paths. Deterministic for fixed input.
inline double lap_cost(const std::vector<std::vector<double>>& a, std::vector<int>& row_to_col) {
  const int n = static_cast<int>(a.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<size_t>(n) + 1, 0.0), v(static_cast<size_t>(n) + 1, 0.0);
  std::vector<int> p(static_cast<size_t>(n) + 1, 0), way(static_cast<size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<size_t>(n) + 1, 0);
    do {
      used[static_cast<size_t>(j0)] = 1;
      int i0 = p[static_cast<size_t>(j0)], j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        double cur = a[static_cast<size_t>(i0) - 1][static_cast<size_t>(j) - 1] -
                     u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
        if (cur < minv[static_cast<size_t>(j)]) {
          minv[static_cast<size_t>(j)] = cur;
          way[static_cast<size_t>(j)] = j0;
        }
        if (minv[static_cast<size_t>(j)] < delta) {
          delta = minv[static_cast<size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) {
          u[static_cast<size_t>(p[static_cast<size_t>(j)])] += delta;
          v[static_cast<size_t>(j)] -= delta;
        } else {
          minv[static_cast<size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<size_t>(j0)] != 0);
    do {
      int j1 = way[static_cast<size_t>(j0)];
      p[static_cast<size_t>(j0)] = p[static_cast<size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  row_to_col.assign(static_cast<size_t>(n), -1);
  double cost = 0.0;
  for (int j = 1; j <= n; ++j) {
    int i = p[static_cast<size_t>(j)];
    row_to_col[static_cast<size_t>(i) - 1] = j - 1;
    cost += a[static_cast<size_t>(i) - 1][static_cast<size_t>(j) - 1];
  }
  return cost;
}

}  // namespace detail

struct Assignment {
  std::vector<int> target_of;  // target_of[i] = column assigned to row i
  double cost = 0.0;
};

// Optimal assignment on a square cost matrix. Among all optimal matchings
// (within a relative epsilon of the optimum) the lexicographically smallest
// mapping is returned, fixed row by row, so ties never depend on solver
// internals.
inline Assignment solve_assignment(const std::vector<std::vector<double>>& cost) {
  const size_t n = cost.size();
  if (n == 0) throw std::invalid_argument("solve_assignment: empty matrix");
  for (const auto& row : cost) {
    if (row.size() != n) throw std::invalid_argument("solve_assignment: matrix not square");
    for (double c : row)
      if (!std::isfinite(c)) throw std::invalid_argument("solve_assignment: non-finite cost");
  }

  std::vector<int> tmp;
  double best = detail::lap_cost(cost, tmp);
  double eps = 1e-9 * std::max(1.0, std::abs(best));

  std::vector<int> cols(n);
  for (size_t j = 0; j < n; ++j) cols[j] = static_cast<int>(j);
  Assignment out;
  out.target_of.assign(n, -1);
  double fixed = 0.0;
  for (size_t i = 0; i < n; ++i) {
    bool placed = false;
    for (size_t cj = 0; cj < cols.size() && !placed; ++cj) {
      int j = cols[cj];
      double rem = 0.0;
      if (i + 1 < n) {
        std::vector<std::vector<double>> sub;
        sub.reserve(n - i - 1);
        for (size_t r = i + 1; r < n; ++r) {
          std::vector<double> row;
          row.reserve(cols.size() - 1);
          for (size_t ck = 0; ck < cols.size(); ++ck)
            if (ck != cj) row.push_back(cost[r][static_cast<size_t>(cols[ck])]);
          sub.push_back(std::move(row));
        }
        std::vector<int> sub_map;
        rem = detail::lap_cost(sub, sub_map);
      }
      double total = fixed + cost[i][static_cast<size_t>(j)] + rem;
      if (total <= best + eps) {
        out.target_of[i] = j;
        fixed += cost[i][static_cast<size_t>(j)];
        cols.erase(cols.begin() + static_cast<long>(cj));
        placed = true;
      }
    }
    if (!placed) throw std::logic_error("solve_assignment: no column admits the optimum");
  }
  out.cost = 0.0;
  for (size_t i = 0; i < n; ++i)
    out.cost += cost[i][static_cast<size_t>(out.target_of[i])];
  return out;
}

// Reformation objective: summed squared distance between each agent and its
// assigned slot. The trailing weight carries the neighbor-shape term, which
// this model keeps switched off; only weight 0 is meaningful here and other
// values are rejected rather than silently ignored.
inline double tps_energy(const std::vector<Vec2>& positions,
                         const std::vector<Vec2>& slots,
                         const std::vector<int>& slot_of, double shape_weight = 0.0) {
  if (shape_weight != 0.0)
    throw std::invalid_argument("tps_energy: nonzero shape weight is not supported");
  if (positions.size() != slot_of.size())
    throw std::invalid_argument("tps_energy: mapping size mismatch");
  double e = 0.0;
  for (size_t i = 0; i < positions.size(); ++i) {
    int s = slot_of[i];
    if (s < 0 || static_cast<size_t>(s) >= slots.size())
      throw std::invalid_argument("tps_energy: slot index out of range");
    e += (positions[i] - slots[static_cast<size_t>(s)]).norm_sq();
  }
  return e;
}

struct ReformTarget {
  Vec2 anchor;
  std::vector<Vec2> slots;  // world positions, indexed like the formation
};

// Where the swarm should re-form: the formation anchored one lookahead
// ahead of the current centroid, toward the goal, slots oriented along
// that direction. A goal closer than the lookahead caps the advance, so a
// late reformation never overshoots the destination.
inline ReformTarget next_swarm_location(const std::vector<AgentState>& agents,
                                        const Vec2& goal, const FormationSpec& formation,
                                        double lookahead) {
  if (agents.empty()) throw std::invalid_argument("next_swarm_location: no agents");
  if (!(lookahead > 0.0)) throw std::invalid_argument("next_swarm_location: lookahead must be > 0");
  Vec2 centroid{0.0, 0.0};
  for (const auto& a : agents) centroid += a.pos;
  centroid = centroid / static_cast<double>(agents.size());
  double reach = distance(goal, centroid);
  Vec2 dir = (goal - centroid).normalized();
  if (dir == Vec2{0.0, 0.0}) dir = formation.heading.normalized();
  ReformTarget t;
  t.anchor = centroid + dir * std::min(lookahead, reach);
  Vec2 right = dir.perp_cw();
  t.slots.reserve(formation.slots.size());
  for (const auto& s : formation.slots) t.slots.push_back(t.anchor + right * s.x + dir * s.y);
  return t;
}

// The swarm counts as re-formed when every agent sits within eps of its slot
// and no pair is closer than the formation spacing minus twice eps.
inline bool reformation_converged(const std::vector<AgentState>& agents,
                                  const std::vector<Vec2>& slots,
                                  const std::vector<int>& slot_of, double eps,
                                  double spacing) {
  if (agents.size() != slot_of.size())
    throw std::invalid_argument("reformation_converged: mapping size mismatch");
  for (size_t i = 0; i < agents.size(); ++i)
    if (distance(agents[i].pos, slots.at(static_cast<size_t>(slot_of[i]))) > eps) return false;
  for (size_t i = 0; i < agents.size(); ++i)
    for (size_t j = i + 1; j < agents.size(); ++j)
      if (distance(agents[i].pos, agents[j].pos) < spacing - 2.0 * eps) return false;
  return true;
}

}  // namespace swarm
