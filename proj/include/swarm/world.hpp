#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarm/vec2.hpp"

namespace swarm {

enum class Phase { Formation, Disturbance, Convergence };

inline const char* phase_name(Phase p) {
  switch (p) {
    case Phase::Formation:   return "Formation";
    case Phase::Disturbance: return "Disturbance";
    case Phase::Convergence: return "Convergence";
  }
  return "?";
}

// One point-mass agent. group_id is only populated while the swarm is split
// around obstacles (disturbance phase); it is cleared again on reformation.
struct AgentState {
  int id = 0;
  Vec2 pos;
  Vec2 vel;
  double nominal_speed = 10.0;  // m/s, preferred cruise speed
  double speed_margin = 2.0;    // m/s, allowed band around nominal_speed
  std::optional<std::string> group_id;
  bool is_leader = false;
  Phase phase = Phase::Formation;

  double speed() const { return vel.norm(); }
};

// Axis-aligned rectangular obstacle.
struct Obstacle {
  int id = 0;
  Vec2 center;
  double half_width = 1.0;  // extent along x
  double half_depth = 1.0;  // extent along y

  Obstacle() = default;
  Obstacle(int id_, Vec2 c, double hw, double hd)
      : id(id_), center(c), half_width(hw), half_depth(hd) {
    if (!(half_width > 0.0) || !(half_depth > 0.0))
      throw std::invalid_argument("Obstacle: half extents must be positive");
  }

  bool operator==(const Obstacle&) const = default;

  double min_x() const { return center.x - half_width; }
  double max_x() const { return center.x + half_width; }
  double min_y() const { return center.y - half_depth; }
  double max_y() const { return center.y + half_depth; }

  std::array<Vec2, 4> corners() const {
    return {Vec2{min_x(), min_y()}, Vec2{max_x(), min_y()},
            Vec2{max_x(), max_y()}, Vec2{min_x(), max_y()}};
  }

  bool contains(const Vec2& p) const {
    return p.x >= min_x() && p.x <= max_x() && p.y >= min_y() && p.y <= max_y();
  }

  // Distance to the boundary: positive outside, negative inside
  // (negative magnitude = penetration depth).
  double signed_clearance(const Vec2& p) const {
    double dx = std::max({min_x() - p.x, 0.0, p.x - max_x()});
    double dy = std::max({min_y() - p.y, 0.0, p.y - max_y()});
    if (dx > 0.0 || dy > 0.0) return std::hypot(dx, dy);
    // inside: distance to the nearest face
    double inner = std::min({p.x - min_x(), max_x() - p.x,
                             p.y - min_y(), max_y() - p.y});
    return -inner;
  }

  // Distance from a point outside to the nearest boundary point (0 if inside).
  double boundary_distance(const Vec2& p) const {
    return std::max(signed_clearance(p), 0.0);
  }
};

// Boundary-to-boundary distance between two rectangles; 0 when they touch
// or overlap.
inline double gap_between(const Obstacle& a, const Obstacle& b) {
  double dx = std::max({b.min_x() - a.max_x(), a.min_x() - b.max_x(), 0.0});
  double dy = std::max({b.min_y() - a.max_y(), a.min_y() - b.max_y(), 0.0});
  return std::hypot(dx, dy);
}

// Smallest rectangle containing both inputs. Used when two obstacles sit too
// close together to pass between and must be treated as one.
inline Obstacle envelope(const Obstacle& a, const Obstacle& b) {
  double lo_x = std::min(a.min_x(), b.min_x());
  double hi_x = std::max(a.max_x(), b.max_x());
  double lo_y = std::min(a.min_y(), b.min_y());
  double hi_y = std::max(a.max_y(), b.max_y());
  Obstacle o;
  o.id = std::min(a.id, b.id);
  o.center = {(lo_x + hi_x) / 2.0, (lo_y + hi_y) / 2.0};
  o.half_width = (hi_x - lo_x) / 2.0;
  o.half_depth = (hi_y - lo_y) / 2.0;
  return o;
}

// The two corners of the face an approaching swarm sees first, left corner
// first relative to the swarm heading.
inline std::array<Vec2, 2> rect_edges(const Obstacle& o, const Vec2& heading) {
  Vec2 h = heading.normalized();
  if (h == Vec2{0.0, 0.0})
    throw std::invalid_argument("rect_edges: zero heading");
  Vec2 left = h.perp_ccw();
  auto cs = o.corners();
  // the front face is spanned by the two corners with the smallest projection
  // onto the heading
  std::sort(cs.begin(), cs.end(), [&](const Vec2& a, const Vec2& b) {
    double pa = a.dot(h), pb = b.dot(h);
    if (pa != pb) return pa < pb;
    return a.dot(left) > b.dot(left);
  });
  Vec2 a = cs[0], b = cs[1];
  if (a.dot(left) < b.dot(left)) std::swap(a, b);
  return {a, b};
}

// Formation template: slot offsets in a frame where +y is the formation
// heading and the anchor sits at the origin.
struct FormationSpec {
  std::vector<Vec2> slots;
  Vec2 heading{0.0, 1.0};
  double inter_agent_distance = 4.0;  // m, minimum slot-to-slot spacing

  bool operator==(const FormationSpec&) const = default;

  void validate(int n_agents) const {
    if (static_cast<int>(slots.size()) != n_agents)
      throw std::invalid_argument("FormationSpec: slot count != agent count");
    if (heading.normalized() == Vec2{0.0, 0.0})
      throw std::invalid_argument("FormationSpec: zero heading");
    if (!(inter_agent_distance > 0.0))
      throw std::invalid_argument("FormationSpec: inter_agent_distance must be > 0");
    for (size_t i = 0; i < slots.size(); ++i)
      for (size_t j = i + 1; j < slots.size(); ++j)
        if (distance(slots[i], slots[j]) < inter_agent_distance - 1e-9)
          throw std::invalid_argument(
              "FormationSpec: slots closer than inter_agent_distance");
  }
};

// Nested-V template: chevrons of four tucked one behind the other, each inner
// chevron pulled one lateral step inward so every slot has a distinct lateral
// coordinate. Spacing scales the whole pattern so the closest pair sits
// exactly `spacing` apart.
inline FormationSpec nested_v_formation(int n, double spacing) {
  if (n < 1 || n > 12)
    throw std::invalid_argument("nested_v_formation: supported swarm size is 1..12");
  FormationSpec f;
  f.inter_agent_distance = spacing;
  double u = spacing / 4.0;  // base pattern is laid out for spacing 4
  // Per nesting level: lateral tuck and how far behind the outer chevron it
  // sits. The third level tucks less and drops further so no pair anywhere
  // falls under the spacing.
  constexpr double kStag[] = {0.0, 1.0, 0.5};
  constexpr double kDrop[] = {0.0, 4.5, 11.0};
  for (int i = 0; i < n; ++i) {
    int chev = i / 4;
    int k = i % 4;
    double stag = kStag[chev];
    double drop = kDrop[chev];
    double lat, along;
    switch (k) {
      case 0: lat = -(6.0 - stag); along = -(6.0 + drop); break;
      case 1: lat = +(6.0 - stag); along = -(6.0 + drop); break;
      case 2: lat = -(3.0 - stag); along = -(3.0 + drop); break;
      default: lat = +(3.0 - stag); along = -(3.0 + drop); break;
    }
    f.slots.push_back(Vec2{lat, along} * u);
  }
  return f;
}

// Global run parameters. Times in seconds, distances in meters.
struct SwarmConfig {
  int n_agents = 8;
  double detection_range = 30.0;  // m
  double dist_safe = 2.0;         // m, hard separation floor
  double grav = 9.81;             // m/s^2
  double drag_coeff = 0.3;        // dimensionless braking coefficient
  double react_time = 0.0;        // s, command latency before braking starts
  double dt = 0.1;                // s, tick length
  double nominal_speed = 10.0;    // m/s
  double speed_margin = 2.0;      // m/s
  double speed_cap = 20.0;        // m/s, absolute ceiling
  double accel_max = 2.0;         // m/s^2
  double turn_rate = 1.5707963267948966;  // rad/s (90 deg/s)
  double clearance_margin = 0.5;  // m, extra lane offset absorbed by tracking error
  double ease_band = 1.0;         // m, soft band before hard braking
  double lookahead = 30.0;        // m, reformation anchor projection
  double converge_eps = 0.5;      // m, slot tolerance for "converged"
  double time_budget = 120.0;     // s
  Vec2 start_anchor{0.0, 0.0};
  Vec2 goal{0.0, 200.0};
  FormationSpec formation;

  bool operator==(const SwarmConfig&) const = default;

  double goal_radius() const { return formation.inter_agent_distance; }

  void validate() const {
    if (n_agents < 1) throw std::invalid_argument("SwarmConfig: n_agents must be >= 1");
    if (!(dist_safe > 0.0)) throw std::invalid_argument("SwarmConfig: dist_safe must be > 0");
    if (!(detection_range > dist_safe))
      throw std::invalid_argument("SwarmConfig: detection_range must exceed dist_safe");
    if (!(dt > 0.0)) throw std::invalid_argument("SwarmConfig: dt must be > 0");
    if (!(grav > 0.0)) throw std::invalid_argument("SwarmConfig: grav must be > 0");
    if (!(drag_coeff > 0.0)) throw std::invalid_argument("SwarmConfig: drag_coeff must be > 0");
    if (react_time < 0.0) throw std::invalid_argument("SwarmConfig: react_time must be >= 0");
    if (!(nominal_speed > 0.0)) throw std::invalid_argument("SwarmConfig: nominal_speed must be > 0");
    if (speed_margin < 0.0) throw std::invalid_argument("SwarmConfig: speed_margin must be >= 0");
    if (!(accel_max > 0.0)) throw std::invalid_argument("SwarmConfig: accel_max must be > 0");
    if (!(turn_rate > 0.0)) throw std::invalid_argument("SwarmConfig: turn_rate must be > 0");
    if (!(time_budget > 0.0)) throw std::invalid_argument("SwarmConfig: time_budget must be > 0");
    if ((goal - start_anchor).norm() < 1e-9)
      throw std::invalid_argument("SwarmConfig: goal coincides with start");
    formation.validate(n_agents);
  }
};

// Along-track / lateral frame of the mission leg from start to goal.
// "left" is heading rotated 90 degrees counter-clockwise; lateral coordinates
// grow to the right, so sorting ascending by lat lists agents left to right.
struct MissionFrame {
  Vec2 heading{0.0, 1.0};
  Vec2 right{1.0, 0.0};

  MissionFrame() = default;
  MissionFrame(const Vec2& start, const Vec2& goal) {
    heading = (goal - start).normalized();
    if (heading == Vec2{0.0, 0.0})
      throw std::invalid_argument("MissionFrame: degenerate mission leg");
    right = heading.perp_cw();
  }

  double along(const Vec2& p) const { return p.dot(heading); }
  double lat(const Vec2& p) const { return p.dot(right); }
  Vec2 from_local(double lat_, double along_) const {
    return right * lat_ + heading * along_;
  }
};

// Reflect a scenario about the vertical line through the swarm's start
// anchor. With the anchor on x = 0 this is an exact sign flip, so mirrored
// runs evolve as exact mirror images of the original.
inline Vec2 mirror_x(const Vec2& p, double cx) { return {2.0 * cx - p.x, p.y}; }

inline void mirror_scenario(SwarmConfig& cfg, std::vector<Obstacle>& obstacles) {
  double cx = cfg.start_anchor.x;
  cfg.goal = mirror_x(cfg.goal, cx);
  for (auto& s : cfg.formation.slots) s.x = -s.x;
  cfg.formation.heading.x = -cfg.formation.heading.x;
  for (auto& o : obstacles) o.center = mirror_x(o.center, cx);
}

}  // namespace swarm
