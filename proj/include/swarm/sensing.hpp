#pragma once

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

#include "swarm/vec2.hpp"
#include "swarm/world.hpp"

namespace swarm {

// Rest-to-impact horizon for an obstacle dead ahead: distance / closing speed.
// A stationary agent never impacts, hence +inf.
inline double time_to_impact(double dist, double speed) {
  if (dist < 0.0) throw std::invalid_argument("time_to_impact: negative distance");
  if (speed < 0.0) throw std::invalid_argument("time_to_impact: negative speed");
  if (speed == 0.0) return std::numeric_limits<double>::infinity();
  return dist / speed;
}

struct StoppingDistance {
  double reaction = 0.0;  // distance covered before braking starts
  double braking = 0.0;   // distance covered while braking
  double total = 0.0;
};

// Braking distance uses the drag-braking model v^2 / (2 g c_d); the reaction
// leg is covered at constant speed for react_time seconds.
inline StoppingDistance stopping_distance(double speed, double grav,
                                          double drag_coeff, double react_time) {
  if (speed < 0.0) throw std::invalid_argument("stopping_distance: negative speed");
  if (!(grav > 0.0) || !(drag_coeff > 0.0))
    throw std::invalid_argument("stopping_distance: grav and drag_coeff must be > 0");
  if (react_time < 0.0)
    throw std::invalid_argument("stopping_distance: negative react_time");
  StoppingDistance d;
  d.reaction = speed * react_time;
  d.braking = speed * speed / (2.0 * grav * drag_coeff);
  d.total = d.reaction + d.braking;
  return d;
}

// Stopping distance plus a safety margin. An agent whose velocity still
// points into an obstacle closer than this must already be braking.
inline double danger_zone(double stopping_total, double margin) {
  if (stopping_total < 0.0 || margin < 0.0)
    throw std::invalid_argument("danger_zone: negative input");
  return stopping_total + margin;
}

struct ObstacleSighting {
  int obstacle_id = 0;
  double dist = 0.0;           // to the nearest boundary point
  double bearing_left = 0.0;   // world angle to the front-left corner, rad
  double bearing_right = 0.0;  // world angle to the front-right corner, rad
  double impact_time = 0.0;    // s, +inf when not moving
};

struct DetectionReport {
  std::vector<ObstacleSighting> sightings;  // sorted nearest first
  double zone_radius = 0.0;                 // danger zone for the agent's current speed

  bool any() const { return !sightings.empty(); }
};

// All obstacles within detection range of the agent, nearest first. Bearings
// are world-frame angles to the two front corners (relative to the swarm
// heading), so rotating the whole scene shifts every bearing by the same
// angle and leaves distances untouched.
inline DetectionReport detect(const AgentState& agent,
                              const std::vector<Obstacle>& obstacles,
                              const Vec2& heading, const SwarmConfig& cfg) {
  if (!(cfg.detection_range > 0.0))
    throw std::invalid_argument("detect: detection_range must be > 0");
  DetectionReport report;
  double speed = agent.speed();
  for (const auto& o : obstacles) {
    double d = o.boundary_distance(agent.pos);
    if (d > cfg.detection_range) continue;
    auto front = rect_edges(o, heading);
    ObstacleSighting s;
    s.obstacle_id = o.id;
    s.dist = d;
    s.bearing_left = angle_of(front[0] - agent.pos);
    s.bearing_right = angle_of(front[1] - agent.pos);
    s.impact_time = time_to_impact(d, speed);
    report.sightings.push_back(s);
  }
  std::sort(report.sightings.begin(), report.sightings.end(),
            [](const ObstacleSighting& a, const ObstacleSighting& b) {
              if (a.dist != b.dist) return a.dist < b.dist;
              return a.obstacle_id < b.obstacle_id;
            });
  report.zone_radius = danger_zone(
      stopping_distance(speed, cfg.grav, cfg.drag_coeff, cfg.react_time).total,
      cfg.dist_safe);
  return report;
}

// True when the ray from `pos` along `vel` enters the rectangle. Used for the
// "still pointing into the obstacle" half of the danger-zone invariant.
inline bool ray_hits(const Vec2& pos, const Vec2& vel, const Obstacle& o) {
  if (vel.norm_sq() < 1e-18) return false;
  double tmin = 0.0, tmax = std::numeric_limits<double>::infinity();
  const double lo[2] = {o.min_x(), o.min_y()};
  const double hi[2] = {o.max_x(), o.max_y()};
  const double p[2] = {pos.x, pos.y};
  const double v[2] = {vel.x, vel.y};
  for (int i = 0; i < 2; ++i) {
    if (std::abs(v[i]) < 1e-12) {
      if (p[i] < lo[i] || p[i] > hi[i]) return false;
    } else {
      double t1 = (lo[i] - p[i]) / v[i];
      double t2 = (hi[i] - p[i]) / v[i];
      if (t1 > t2) std::swap(t1, t2);
      tmin = std::max(tmin, t1);
      tmax = std::min(tmax, t2);
      if (tmin > tmax) return false;
    }
  }
  return true;
}

}  // namespace swarm
