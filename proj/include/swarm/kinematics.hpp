#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "swarm/vec2.hpp"
#include "swarm/world.hpp"

namespace swarm {

// Desired motion for one tick. Speeds are clamped into the agent's allowed
// band at construction so downstream code never sees an out-of-range request.
struct MotionCommand {
  Vec2 desired_heading{0.0, 1.0};  // unit vector
  double desired_speed = 0.0;      // m/s

  MotionCommand() = default;
  MotionCommand(const Vec2& heading, double speed, const AgentState& agent,
                const SwarmConfig& cfg) {
    Vec2 h = heading.normalized();
    desired_heading = (h == Vec2{0.0, 0.0}) ? Vec2{0.0, 1.0} : h;
    double hi = std::min(agent.nominal_speed + agent.speed_margin, cfg.speed_cap);
    desired_speed = std::clamp(speed, 0.0, hi);
  }
};

// Time to bleed off all speed at the configured acceleration limit.
inline double time_to_stop(double speed, double accel_max) {
  if (!(accel_max > 0.0)) throw std::invalid_argument("time_to_stop: accel_max must be > 0");
  if (speed < 0.0) throw std::invalid_argument("time_to_stop: negative speed");
  return speed / accel_max;
}

// Advance one agent by one tick. Speed moves toward the commanded speed with
// at most accel_max*dt of change; heading turns toward the commanded heading
// with at most turn_rate*dt of rotation (an agent at rest may point anywhere,
// so it adopts the commanded heading directly). Position integrates the
// updated velocity over dt.
inline void step(AgentState& agent, const MotionCommand& cmd, const SwarmConfig& cfg) {
  double speed = agent.speed();

  Vec2 heading;
  if (speed < 1e-9) {
    heading = cmd.desired_heading;
  } else {
    heading = agent.vel / speed;
    double err = angle_between(heading, cmd.desired_heading);
    double max_turn = cfg.turn_rate * cfg.dt;
    double turn = std::clamp(err, -max_turn, max_turn);
    heading = heading.rotated(turn);
  }

  double dv = std::clamp(cmd.desired_speed - speed, -cfg.accel_max * cfg.dt,
                         cfg.accel_max * cfg.dt);
  double new_speed = std::max(speed + dv, 0.0);

  agent.vel = heading * new_speed;
  agent.pos += agent.vel * cfg.dt;
}

}  // namespace swarm
