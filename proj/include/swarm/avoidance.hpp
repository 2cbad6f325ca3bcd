#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarm/kinematics.hpp"
#include "swarm/sensing.hpp"
#include "swarm/vec2.hpp"
#include "swarm/world.hpp"

namespace swarm {

// How to treat a pair of nearby obstacles: pass between them, or merge them
// into one block and go around.
enum class ObstacleMode { GapTransit, Enveloped };

inline ObstacleMode choose_mode(double gap, double dist_safe) {
  if (gap < 0.0) throw std::invalid_argument("choose_mode: negative gap");
  if (!(dist_safe > 0.0)) throw std::invalid_argument("choose_mode: dist_safe must be > 0");
  return gap > dist_safe ? ObstacleMode::GapTransit : ObstacleMode::Enveloped;
}

// Collapse obstacles whose mutual gap is too small to pass through into
// combined blocks, repeating until no pair qualifies. The result is sorted
// left to right in the mission frame.
inline std::vector<Obstacle> envelope_blocks(std::vector<Obstacle> obstacles,
                                             double dist_safe,
                                             const MissionFrame& frame) {
  bool merged = true;
  while (merged && obstacles.size() > 1) {
    merged = false;
    for (size_t i = 0; i < obstacles.size() && !merged; ++i) {
      for (size_t j = i + 1; j < obstacles.size() && !merged; ++j) {
        if (choose_mode(gap_between(obstacles[i], obstacles[j]), dist_safe) ==
            ObstacleMode::Enveloped) {
          obstacles[i] = envelope(obstacles[i], obstacles[j]);
          obstacles.erase(obstacles.begin() + static_cast<long>(j));
          merged = true;
        }
      }
    }
  }
  std::sort(obstacles.begin(), obstacles.end(),
            [&](const Obstacle& a, const Obstacle& b) {
              double la = frame.lat(a.center), lb = frame.lat(b.center);
              if (la != lb) return la < lb;
              return a.id < b.id;
            });
  return obstacles;
}

namespace detail {
inline double min_lat(const Obstacle& o, const MissionFrame& f) {
  auto cs = o.corners();
  double m = f.lat(cs[0]);
  for (const auto& c : cs) m = std::min(m, f.lat(c));
  return m;
}
inline double max_lat(const Obstacle& o, const MissionFrame& f) {
  auto cs = o.corners();
  double m = f.lat(cs[0]);
  for (const auto& c : cs) m = std::max(m, f.lat(c));
  return m;
}
inline double min_along(const Obstacle& o, const MissionFrame& f) {
  auto cs = o.corners();
  double m = f.along(cs[0]);
  for (const auto& c : cs) m = std::min(m, f.along(c));
  return m;
}
inline double max_along(const Obstacle& o, const MissionFrame& f) {
  auto cs = o.corners();
  double m = f.along(cs[0]);
  for (const auto& c : cs) m = std::max(m, f.along(c));
  return m;
}
}  // namespace detail

// One way past a block row: around its left edge, around its right edge, or
// through a gap between two adjacent blocks. Routes are listed left to right;
// a row of k blocks offers k + 1 of them.
struct Route {
  enum class Kind { Corner, Gap };
  Kind kind = Kind::Corner;
  int side = 0;            // corner routes: 0 = left of everything, 1 = right
  int block_a = -1;        // corner: the extreme block; gap: left neighbor
  int block_b = -1;        // gap: right neighbor
  double lane_lat = 0.0;   // lateral of the transit lane (gap: centerline)
  double front_along = 0.0;
  double back_along = 0.0;
  Vec2 corner;             // corner routes: the front corner rounded
  double width = 0.0;      // gap routes: lateral clearance between the blocks

  // key shared between plans built from the same geometry, so split groups
  // funneling into the same corridor join one queue
  std::string lane_key() const {
    if (kind == Kind::Gap) return "G:" + std::to_string(block_a) + ":" + std::to_string(block_b);
    return (side == 0 ? "L:" : "R:") + std::to_string(block_a);
  }
};

// Route options for a left-to-right sorted block row. The two corner lanes
// clear the lateral extremes of the whole row; gap lanes run the centerline
// between adjacent blocks. A gap that is blocked (blocks overlapping
// laterally, e.g. staggered in depth) gets width 0 and is left to the
// feasibility check.
inline std::vector<Route> build_routes(const std::vector<Obstacle>& blocks,
                                       const MissionFrame& frame, double clearance) {
  if (blocks.empty()) throw std::invalid_argument("build_routes: no blocks");
  if (!(clearance > 0.0)) throw std::invalid_argument("build_routes: clearance must be > 0");
  double row_min_lat = detail::min_lat(blocks[0], frame);
  double row_max_lat = detail::max_lat(blocks[0], frame);
  double row_min_along = detail::min_along(blocks[0], frame);
  double row_max_along = detail::max_along(blocks[0], frame);
  int left_block = 0, right_block = 0;
  for (size_t i = 1; i < blocks.size(); ++i) {
    double lo = detail::min_lat(blocks[i], frame);
    double hi = detail::max_lat(blocks[i], frame);
    if (lo < row_min_lat) { row_min_lat = lo; left_block = static_cast<int>(i); }
    if (hi > row_max_lat) { row_max_lat = hi; right_block = static_cast<int>(i); }
    row_min_along = std::min(row_min_along, detail::min_along(blocks[i], frame));
    row_max_along = std::max(row_max_along, detail::max_along(blocks[i], frame));
  }

  std::vector<Route> routes;
  {
    Route r;
    r.kind = Route::Kind::Corner;
    r.side = 0;
    r.block_a = blocks[static_cast<size_t>(left_block)].id;
    r.lane_lat = row_min_lat - clearance;
    r.front_along = row_min_along;
    r.back_along = row_max_along;
    r.corner = rect_edges(blocks[static_cast<size_t>(left_block)], frame.heading)[0];
    routes.push_back(r);
  }
  for (size_t i = 0; i + 1 < blocks.size(); ++i) {
    Route r;
    r.kind = Route::Kind::Gap;
    r.block_a = blocks[i].id;
    r.block_b = blocks[i + 1].id;
    double a_hi = detail::max_lat(blocks[i], frame);
    double b_lo = detail::min_lat(blocks[i + 1], frame);
    r.width = std::max(b_lo - a_hi, 0.0);
    r.lane_lat = (a_hi + b_lo) / 2.0;
    r.front_along = std::min(detail::min_along(blocks[i], frame),
                             detail::min_along(blocks[i + 1], frame));
    r.back_along = std::max(detail::max_along(blocks[i], frame),
                            detail::max_along(blocks[i + 1], frame));
    routes.push_back(r);
  }
  {
    Route r;
    r.kind = Route::Kind::Corner;
    r.side = 1;
    r.block_a = blocks[static_cast<size_t>(right_block)].id;
    r.lane_lat = row_max_lat + clearance;
    r.front_along = row_min_along;
    r.back_along = row_max_along;
    r.corner = rect_edges(blocks[static_cast<size_t>(right_block)], frame.heading)[1];
    routes.push_back(r);
  }
  return routes;
}

// A gap lane must leave the safety clearance on both sides.
inline bool route_feasible(const Route& r, double clearance) {
  return r.kind != Route::Kind::Gap || r.width >= 2.0 * clearance;
}

// Waypoints for one route. Corner routes: the offset point `clearance`
// lateral of the rounded corner, then a clearing point `clearance` beyond the
// row's back face, after which the agent resumes heading for the goal. Gap
// routes: centerline entry just ahead of the front face, gap midpoint, and an
// exit beyond the back face.
inline std::vector<Vec2> plan_route(const Route& r, const MissionFrame& frame,
                                    double clearance) {
  if (!(clearance > 0.0)) throw std::invalid_argument("plan_route: clearance must be > 0");
  if (!route_feasible(r, clearance))
    throw std::invalid_argument("plan_route: gap narrower than twice the safety clearance");
  if (r.kind == Route::Kind::Corner) {
    double lane = r.lane_lat;
    Vec2 offset_pt = frame.from_local(lane, frame.along(r.corner));
    Vec2 clearing = frame.from_local(lane, r.back_along + clearance);
    return {offset_pt, clearing};
  }
  Vec2 entry = frame.from_local(r.lane_lat, r.front_along - clearance);
  Vec2 mid = frame.from_local(r.lane_lat, (r.front_along + r.back_along) / 2.0);
  Vec2 exit = frame.from_local(r.lane_lat, r.back_along + clearance);
  return {entry, mid, exit};
}

// Transit order for agents sharing a corridor: farthest along first, ties to
// the lower id. Stable given stable positions.
inline std::vector<int> merge_queue(const std::vector<AgentState>& members,
                                    const MissionFrame& frame) {
  std::vector<int> ids;
  ids.reserve(members.size());
  std::vector<std::pair<double, int>> keyed;
  keyed.reserve(members.size());
  for (const auto& a : members) keyed.emplace_back(frame.along(a.pos), a.id);
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (const auto& [_, id] : keyed) ids.push_back(id);
  return ids;
}

// Speed cap against every nearby agent on a conflicting course. A conflict
// is a closing relative course whose closest approach would cut inside the
// floor envelope. The cap steps down to the lower band edge inside a soft
// easing band and to zero once the remaining gap no longer covers the
// braking need. Priority (farther along-track, ties to the lower id) does
// not exempt anyone, it only shortens the stand-off, so contested crossings
// resolve toward the agent behind giving way.
inline double separation_governor(const AgentState& me,
                                  const std::vector<AgentState>& all,
                                  const MissionFrame& frame, const SwarmConfig& cfg,
                                  double desired, const Vec2& desired_heading,
                                  Vec2* threat = nullptr) {
  constexpr double kHardMargin = 0.25;      // m, stand-off beyond the floor
  constexpr double kRankMargin = 0.75;      // m, extra stand-off when the other has right of way
  constexpr double kOwnApproachMin = 0.05;  // m/s, below this braking cannot help
  double slow = std::max(me.nominal_speed - me.speed_margin, 0.0);
  double my_along = frame.along(me.pos);
  double my_speed = me.speed();
  // When a hard stop comes out, `threat` reports the unit bearing of the
  // most binding agent so the caller can steer the slide away from it.
  double worst = -std::numeric_limits<double>::infinity();
  // What the command would actually do next tick, not its face value: closure
  // it cannot yet produce must not trigger full stops out of a standstill.
  double next_speed = std::min(desired, my_speed + cfg.accel_max * cfg.dt);
  Vec2 want = desired_heading * next_speed;
  for (const auto& other : all) {
    if (other.id == me.id) continue;
    Vec2 dp = me.pos - other.pos;
    double d = dp.norm();
    if (d > 40.0) continue;
    if (d < 1e-9) return 0.0;
    if (d < cfg.dist_safe) {
      // Closing, or commanded into them: hold still. A commanded course that
      // separates goes through at speed; a neutral one creeps, so side-by-side
      // stalls drain instead of freezing.
      double c_now = -dp.dot(me.vel - other.vel) / d;
      double c_cmd = -dp.dot(want - other.vel) / d;
      if (c_now > 1e-9 || c_cmd > 1e-9) {
        if (threat) *threat = dp * (-1.0 / d);
        return 0.0;
      }
      if (c_cmd < -1e-9) continue;
      desired = std::min(desired, slow);
      continue;
    }
    double c_now = -dp.dot(me.vel - other.vel) / d;
    double own_now = -dp.dot(me.vel) / d;  // the share of the closure my motion causes
    double c_cmd = -dp.dot(want - other.vel) / d;
    double own_cmd = -dp.dot(want) / d;
    // A pass whose relative course stays clear of the floor envelope resolves
    // itself; braking is owed only when the closest approach would cut inside
    // it. Without this, parked neighbors near a commanded line freeze traffic
    // that would in fact clear them.
    double env = cfg.dist_safe + kHardMargin;
    auto cpa_miss = [d](const Vec2& vrel, double c) {
      double vr2 = vrel.dot(vrel);
      if (vr2 < 1e-12) return 0.0;
      double m2 = d * d * (1.0 - c * c / vr2);
      return m2 > 0.0 ? std::sqrt(m2) : 0.0;
    };
    // The own-share gate filters out near-tangent chatter, but right at the
    // floor there is no headroom left to absorb even that trickle, so any
    // closing contribution of mine counts there.
    double own_min = d - cfg.dist_safe < 0.05 ? 1e-9 : kOwnApproachMin;
    bool act_now = c_now > 0.0 && own_now > own_min &&
                   cpa_miss(me.vel - other.vel, c_now) < env;
    bool act_cmd = c_cmd > 0.0 && own_cmd > own_min &&
                   cpa_miss(want - other.vel, c_cmd) < env;
    if (!act_now && !act_cmd) continue;
    double o_along = frame.along(other.pos);
    bool right_of_way = o_along < my_along - 1e-9 ||
                        (std::abs(o_along - my_along) <= 1e-9 && other.id > me.id);
    // Budget the gap for the worst case where both parties brake at
    // accel_max: my share of the closure (own) dies over my stopping time,
    // their share (c - own) over theirs, which costs
    // (own * v_me + (c - own) * v_other) / (2 * accel_max) of separation.
    // Dead astern this is the familiar (v_me^2 - v_other^2) / (2 * accel_max),
    // so a leader braking to a stop is covered. On top go one tick of closing
    // drift and one tick of reaction lag. Whoever lacks right of way stands
    // off further, which fixes the order crossings resolve in. That extra
    // stand-off covers the other party's motion being unpredictable, so it
    // scales away as they slow; against a parked neighbor the junior may
    // still creep, which lets packed clusters unwind instead of deadlocking.
    double o_speed = other.speed();
    auto brake_dist = [&](double c, double own, double v_me) {
      return std::max(own * v_me + (c - own) * o_speed, 0.0) / (2.0 * cfg.accel_max);
    };
    double need = 0.0;
    if (act_now)
      need = c_now * cfg.dt + brake_dist(c_now, own_now, my_speed) +
             0.5 * cfg.dt * my_speed;
    if (act_cmd)
      need = std::max(need, c_cmd * cfg.dt + brake_dist(c_cmd, own_cmd, next_speed) +
                                0.5 * cfg.dt * next_speed);
    double margin = kHardMargin;
    if (!right_of_way)
      margin += kRankMargin * std::min(1.0, o_speed / std::max(slow, 1.0));
    // The stand-off pays for kinetic uncertainty, so a nearly static pair
    // keeps almost none of it; without this, agents parked just over the
    // floor can never creep apart and a settled cluster locks solid.
    margin *= std::min(1.0, (my_speed + next_speed + o_speed) / std::max(slow, 1.0));
    if (d - cfg.dist_safe < need + margin) {
      desired = 0.0;
      double sev = need + margin - (d - cfg.dist_safe);
      if (threat && sev > worst) {
        worst = sev;
        *threat = dp * (-1.0 / d);
      }
    } else if (d - cfg.dist_safe < need + margin + cfg.ease_band) {
      desired = std::min(desired, slow);
    }
  }
  return desired;
}

struct Steer {
  Vec2 heading;
  double desired;
};

// Runs the speed governor and turns a hard stop into the safest motion still
// available. A moving agent sheds the velocity component toward the binding
// threat so the slide stops feeding the conflict. A parked one has no slide
// to shape, so it tries the same projection on its commanded heading and
// creeps out along it when the governor clears that direction; that sideways
// wriggle is what lets a packed arrival worm itself into open ground.
inline Steer resolve_separation(const AgentState& me,
                                const std::vector<AgentState>& all,
                                const MissionFrame& frame,
                                const SwarmConfig& cfg, double desired,
                                const Vec2& heading) {
  Vec2 threat{0.0, 0.0};
  double granted = separation_governor(me, all, frame, cfg, desired, heading, &threat);
  if (granted != 0.0 || threat == Vec2{0.0, 0.0}) return {heading, granted};
  double speed = me.speed();
  if (speed > 1e-9) {
    Vec2 vdir = me.vel / speed;
    double into = vdir.dot(threat);
    Vec2 esc = into > 0.0 ? vdir - threat * into : vdir;
    return {esc.norm() > 1e-6 ? esc.normalized() : vdir, 0.0};
  }
  double into = heading.dot(threat);
  if (into <= 0.0) return {heading, 0.0};
  Vec2 esc = heading - threat * into;
  if (esc.norm() <= 1e-6) return {heading, 0.0};
  esc = esc.normalized();
  return {esc, separation_governor(me, all, frame, cfg, desired, esc)};
}

// Last-resort brake: an agent whose motion ray still enters an obstacle must
// be slowing before it reaches the danger zone around that obstacle. From a
// standstill the commanded heading is the ray, so a parked agent cannot
// stutter-step toward a face the velocity test would only catch once moving.
// At or inside the boundary only strictly outward motion goes through.
inline double obstacle_backstop(const AgentState& me,
                                const std::vector<Obstacle>& obstacles,
                                const SwarmConfig& cfg, double desired,
                                const Vec2& desired_heading = {0.0, 0.0}) {
  double speed = me.speed();
  Vec2 ray = speed > 1e-9 ? me.vel : desired_heading;
  if (ray == Vec2{0.0, 0.0}) return desired;
  double slow = std::max(me.nominal_speed - me.speed_margin, 0.0);
  auto sd = stopping_distance(speed, cfg.grav, cfg.drag_coeff, cfg.react_time);
  double zone = danger_zone(sd.total, cfg.dist_safe);
  for (const auto& o : obstacles) {
    double sc = o.signed_clearance(me.pos);
    if (sc > zone + 2.0 + cfg.ease_band) continue;
    if (sc <= 0.0) {
      constexpr double h = 1e-3;
      Vec2 out{(o.signed_clearance(me.pos + Vec2{h, 0.0}) -
                o.signed_clearance(me.pos - Vec2{h, 0.0})) /
                   (2.0 * h),
               (o.signed_clearance(me.pos + Vec2{0.0, h}) -
                o.signed_clearance(me.pos - Vec2{0.0, h})) /
                   (2.0 * h)};
      if (ray.dot(out) <= 1e-9) return 0.0;
      desired = std::min(desired, slow);
      continue;
    }
    if (!ray_hits(me.pos, ray, o)) continue;
    if (sc <= zone + 2.0) return 0.0;
    desired = std::min(desired, slow);
  }
  return desired;
}

// Per-agent route-following state plus the speed governors; drives every
// agent while the swarm is split around obstacles. The same controller is
// stepped by the live engine and by the transit-time predictor, so predicted
// and realized transits agree exactly.
class DisturbanceController {
 public:
  static constexpr double kWaypointRadius = 2.0;  // m, advance distance

  DisturbanceController() = default;
  DisturbanceController(const MissionFrame& frame, const Vec2& goal)
      : frame_(frame), goal_(goal) {}

  // (Re)routes `members`; other agents keep their current routes. Agents on
  // a corner route that already fly wider than the lane keep their own
  // lateral instead of being pulled inward.
  void plan(const std::vector<int>& members, const std::vector<Route>& routes,
            const std::map<int, int>& route_of_member,
            const std::vector<AgentState>& agents, const SwarmConfig& cfg) {
    double clearance = cfg.dist_safe + cfg.clearance_margin;
    double standoff = 2.0 * clearance;
    for (int id : members) {
      const AgentState& a = agent_by_id(agents, id);
      const Route& base = routes.at(static_cast<size_t>(route_of_member.at(id)));
      Route r = base;
      if (r.kind == Route::Kind::Corner) {
        double lat = frame_.lat(a.pos);
        r.lane_lat = (r.side == 0) ? std::min(r.lane_lat, lat) : std::max(r.lane_lat, lat);
      }
      AgentPlan p;
      p.lane_key = base.lane_key();
      if (r.kind == Route::Kind::Corner) {
        p.wps = {frame_.from_local(r.lane_lat, r.front_along - standoff),
                 frame_.from_local(r.lane_lat, frame_.along(r.corner)),
                 frame_.from_local(r.lane_lat, r.back_along + clearance)};
      } else {
        if (!route_feasible(r, clearance))
          throw std::invalid_argument("DisturbanceController: infeasible gap route");
        auto base_wps = plan_route(r, frame_, clearance);
        p.wps.reserve(base_wps.size() + 1);
        p.wps.push_back(frame_.from_local(r.lane_lat, r.front_along - standoff));
        p.wps.insert(p.wps.end(), base_wps.begin(), base_wps.end());
      }
      p.pass_dirs.resize(p.wps.size());
      for (size_t i = 0; i < p.wps.size(); ++i) {
        Vec2 from = (i == 0) ? a.pos : p.wps[i - 1];
        Vec2 dir = (p.wps[i] - from).normalized();
        p.pass_dirs[i] = (dir == Vec2{0.0, 0.0}) ? frame_.heading : dir;
      }
      p.next = 0;
      // A replan can land mid-route; waypoints at or behind the agent's
      // progress are stale and chasing them would mean doubling back.
      while (p.next + 1 < p.wps.size() &&
             frame_.along(p.wps[p.next]) <= frame_.along(a.pos))
        ++p.next;
      skip_passed(p, a.pos);
      plans_[id] = std::move(p);
    }
  }

  bool has_plan(int id) const { return plans_.count(id) > 0; }

  const std::vector<Vec2>* waypoints(int id) const {
    auto it = plans_.find(id);
    return it == plans_.end() ? nullptr : &it->second.wps;
  }

  std::string lane_of(int id) const {
    auto it = plans_.find(id);
    return it == plans_.end() ? std::string{} : it->second.lane_key;
  }

  // Desired motion for one disturbed agent: pursue the current waypoint (the
  // goal once the route is done) at nominal speed, throttled by the
  // separation governor and the obstacle backstop.
  MotionCommand disturbance_command(const AgentState& me,
                                    const std::vector<AgentState>& all,
                                    const std::vector<Obstacle>& obstacles,
                                    const SwarmConfig& cfg) const {
    Vec2 target = goal_;
    double desired = me.nominal_speed;
    auto it = plans_.find(me.id);
    if (it != plans_.end() && it->second.next < it->second.wps.size()) {
      target = it->second.wps[it->second.next];
      if (it->second.next == 0) {
        // Funneling into the lane from a packed formation needs two rules the
        // waypoint alone does not give. Laterally, never aim across the line
        // of anyone currently beside me: a bow crossing at speed cannot be
        // saved by braking, so the sideways slide waits until the file has
        // stretched. Longitudinally, pace myself off the nearest lane-mate
        // ahead so the group strings out into a single file instead of
        // arriving at the entry abreast.
        double hold = 2.0 * cfg.dist_safe;
        double lat_pad = cfg.dist_safe + 0.5;
        double my_along = frame_.along(me.pos);
        double my_lat = frame_.lat(me.pos);
        double t_lat = frame_.lat(target);
        double dir = t_lat > my_lat ? 1.0 : -1.0;
        for (const auto& o : all) {
          if (o.id == me.id) continue;
          if (std::abs(frame_.along(o.pos) - my_along) >= hold) continue;
          double o_lat = frame_.lat(o.pos);
          if (dir * (o_lat - my_lat) <= 1e-9) continue;
          double bound = o_lat - dir * lat_pad;
          t_lat = dir > 0.0 ? std::min(t_lat, bound) : std::max(t_lat, bound);
        }
        if (dir * (t_lat - my_lat) < 0.0) t_lat = my_lat;
        const AgentState* pred = nullptr;
        double pred_along = std::numeric_limits<double>::infinity();
        for (const auto& [oid, op] : plans_) {
          if (oid == me.id || op.lane_key != it->second.lane_key) continue;
          const AgentState& o = agent_by_id(all, oid);
          // pace only off lane-mates near my own driving line; a waiter
          // parked wide of the file must not stall the file behind it
          if (std::abs(frame_.lat(o.pos) - t_lat) >= lat_pad) continue;
          double oa = frame_.along(o.pos);
          bool ahead = oa > my_along + 1e-9 ||
                       (std::abs(oa - my_along) <= 1e-9 && oid < me.id);
          if (ahead && oa < pred_along) {
            pred_along = oa;
            pred = &o;
          }
        }
        if (pred) {
          double gap = pred_along - my_along;
          double vp = pred->vel.dot(frame_.heading);
          desired = std::clamp(vp + (gap - hold), 0.0, me.nominal_speed);
        }
        double t_along = std::max(std::min(frame_.along(target), my_along + 6.0),
                                  my_along + 0.5);
        // A wait line that overlaps a block parks short of its face instead
        // of walking the queue into it. Blocks already fully astern do not
        // count, or a cleared row would pin the queue behind it forever.
        for (const auto& ob : obstacles) {
          if (detail::max_along(ob, frame_) <= my_along) continue;
          if (t_lat <= detail::min_lat(ob, frame_) - lat_pad ||
              t_lat >= detail::max_lat(ob, frame_) + lat_pad)
            continue;
          double hold_along = detail::min_along(ob, frame_) - lat_pad;
          if (t_along > hold_along) {
            t_along = hold_along;
            if (t_along <= my_along) {
              t_along = my_along;
              desired = 0.0;
            }
          }
        }
        target = frame_.from_local(t_lat, t_along);
      }
    }
    Vec2 heading = (target - me.pos).normalized();
    if (heading == Vec2{0.0, 0.0}) heading = frame_.heading;
    auto steer = resolve_separation(me, all, frame_, cfg, desired, heading);
    heading = steer.heading;
    desired = obstacle_backstop(me, obstacles, cfg, steer.desired, heading);
    return MotionCommand(heading, desired, me, cfg);
  }

  // Advance waypoint indices after positions were committed for the tick.
  void after_step(const std::vector<AgentState>& agents) {
    for (auto& [id, p] : plans_) skip_passed(p, agent_by_id(agents, id).pos);
  }

  void clear() { plans_.clear(); }

 private:
  struct AgentPlan {
    std::vector<Vec2> wps;
    std::vector<Vec2> pass_dirs;  // plane normals used for the "passed" test
    size_t next = 0;
    std::string lane_key;
  };

  static const AgentState& agent_by_id(const std::vector<AgentState>& agents, int id) {
    for (const auto& a : agents)
      if (a.id == id) return a;
    throw std::logic_error("DisturbanceController: unknown agent id");
  }

  void skip_passed(AgentPlan& p, const Vec2& pos) const {
    while (p.next < p.wps.size()) {
      const Vec2& wp = p.wps[p.next];
      bool close = distance(pos, wp) <= kWaypointRadius;
      bool passed = (wp - pos).dot(p.pass_dirs[p.next]) <= 0.0;
      if (close || passed)
        ++p.next;
      else
        break;
    }
  }

  MissionFrame frame_;
  Vec2 goal_;
  std::map<int, AgentPlan> plans_;
};

}  // namespace swarm
