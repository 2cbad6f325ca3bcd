#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarm/avoidance.hpp"
#include "swarm/energy.hpp"
#include "swarm/grouping.hpp"
#include "swarm/kinematics.hpp"
#include "swarm/reformation.hpp"
#include "swarm/sensing.hpp"
#include "swarm/vec2.hpp"
#include "swarm/world.hpp"

namespace swarm {

// Which split policy the run uses. Optimized picks the split with the best
// simulated transit time; NearestLane sends every agent to its laterally
// nearest lane, which for a single block row is the shortest path past the
// nearer corner.
enum class Policy { Optimized, NearestLane };

struct EngineOptions {
  Policy policy = Policy::Optimized;
  // Non-empty: part sizes imposed on the first grouping event (left to
  // right), used by the split sweep. Later events choose freely.
  std::vector<int> forced_first_split;
};

struct Scenario {
  std::string name = "scenario";
  unsigned seed = 0;
  SwarmConfig cfg;
  std::vector<Obstacle> obstacles;
  PowerModel power;
  std::string mode = "single";
  std::string out_dir = "out";

  bool operator==(const Scenario&) const = default;
};

// Raised when a forced split routes agents through a lane that cannot be
// used; the sweep records such splits as infeasible instead of failing.
struct InfeasibleSplitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TraceRow {
  long tick = 0;
  int agent_id = 0;
  double x = 0.0, y = 0.0, speed = 0.0;
  Phase phase = Phase::Formation;
  std::string group;
};

struct MetricsRow {
  long tick = 0;
  double mean_speed = 0.0, std_speed = 0.0;
  double mean_nn_dist = 0.0, std_nn_dist = 0.0;
  double min_pair_dist = 0.0;
};

struct GroupingEvent {
  long tick = 0;
  std::string parent_tag;
  std::vector<int> obstacle_ids;  // raw obstacle ids that triggered the event
  std::vector<int> sizes;         // part sizes, left to right
  double predicted_time = 0.0;    // simulated transit time of the chosen split
  std::vector<std::string> tags;  // one per route, empty parts included
  std::map<std::string, int> leaders;
};

struct TransitRecord {
  long plan_tick = 0;   // tick whose planning created the split
  long pass_tick = -1;  // tick after whose step the last member was past
  double center_along = 0.0;
  std::vector<int> members;
  bool closed() const { return pass_tick >= 0; }
  // counts the plan tick's own step, matching the predictor
  double duration_s(double dt) const {
    return closed() ? static_cast<double>(pass_tick - plan_tick + 1) * dt : -1.0;
  }
};

struct RunResult {
  bool complete = false;
  long ticks = 0;
  double dt = 0.1;
  Phase final_phase = Phase::Formation;
  std::vector<AgentState> agents;
  std::vector<TraceRow> trace;
  std::vector<MetricsRow> metrics;
  EnergyLedger energy;
  std::vector<GroupingEvent> events;
  std::vector<TransitRecord> transits;
  std::vector<long> leader_change_ticks;
  std::vector<Vec2> reform_slots;   // world slot targets of the last reformation
  std::vector<int> reform_slot_of;  // agent index -> index into reform_slots
  double duration_s() const { return static_cast<double>(ticks) * dt; }
};

// Discrete-time mission simulator. One Engine instance drives one run:
// formation flight until an obstacle comes into range, split transit past
// the blocks, reformation, formation flight to the goal.
class Engine {
 public:
  explicit Engine(Scenario scenario, EngineOptions opts = {})
      : sc_(std::move(scenario)), opts_(std::move(opts)) {
    sc_.cfg.validate();
    if (sc_.cfg.n_agents < 2)
      throw std::invalid_argument("Engine: need at least two agents");
    if (!opts_.forced_first_split.empty() && opts_.policy != Policy::Optimized)
      throw std::invalid_argument("Engine: forced splits require the optimized policy");
    frame_ = MissionFrame(sc_.cfg.start_anchor, sc_.cfg.goal);
    ctl_ = DisturbanceController(frame_, sc_.cfg.goal);
    anchor_ = sc_.cfg.start_anchor;
    anchor_speed_ = sc_.cfg.nominal_speed;
    agents_.reserve(static_cast<size_t>(sc_.cfg.n_agents));
    slot_of_.resize(static_cast<size_t>(sc_.cfg.n_agents));
    for (int i = 0; i < sc_.cfg.n_agents; ++i) {
      AgentState a;
      a.id = i;
      a.pos = anchor_ + slot_offset(i);
      a.vel = frame_.heading * sc_.cfg.nominal_speed;
      a.nominal_speed = sc_.cfg.nominal_speed;
      a.speed_margin = sc_.cfg.speed_margin;
      a.phase = Phase::Formation;
      agents_.push_back(a);
      slot_of_[static_cast<size_t>(i)] = i;
    }
  }

  RunResult run() {
    if (ran_) throw std::logic_error("Engine: run() is single-shot");
    ran_ = true;
    res_.dt = sc_.cfg.dt;
    res_.energy.per_agent.assign(agents_.size(), 0.0);
    record_tick_outputs(0);
    long max_ticks = static_cast<long>(std::ceil(sc_.cfg.time_budget / sc_.cfg.dt));
    for (tick_ = 1; tick_ <= max_ticks; ++tick_) {
      phase_logic();
      auto cmds = compute_commands();
      for (size_t i = 0; i < agents_.size(); ++i) step(agents_[i], cmds[i], sc_.cfg);
      if (phase_ == Phase::Disturbance) ctl_.after_step(agents_);
      if (phase_ == Phase::Formation) {
        // The virtual leader obeys the same acceleration limit as the agents,
        // so a freshly reformed swarm spools up without being left behind.
        anchor_speed_ = std::min(sc_.cfg.nominal_speed,
                                 anchor_speed_ + sc_.cfg.accel_max * sc_.cfg.dt);
        anchor_ += frame_.heading * (anchor_speed_ * sc_.cfg.dt);
      }
      accumulate_energy();
      close_transits();
      record_tick_outputs(tick_);
      res_.ticks = tick_;
      if (at_goal()) {
        res_.complete = true;
        break;
      }
    }
    res_.agents = agents_;
    res_.final_phase = phase_;
    return res_;
  }

  const MissionFrame& frame() const { return frame_; }

 private:
  struct ActiveGroup {
    std::string tag;
    std::vector<int> members;
    std::vector<int> planned_ids;  // obstacle ids the current plan covers
    int leader = -1;
  };

  Vec2 slot_offset(int slot) const {
    const Vec2& s = sc_.cfg.formation.slots.at(static_cast<size_t>(slot));
    return frame_.right * s.x + frame_.heading * s.y;
  }

  double min_member_along(const std::vector<int>& members) const {
    double m = std::numeric_limits<double>::infinity();
    for (int id : members) m = std::min(m, frame_.along(agents_[static_cast<size_t>(id)].pos));
    return m;
  }

  // Obstacles that matter to `members` right now: inside detection range of
  // at least one of them and not yet fully passed by all of them.
  std::vector<int> active_ids(const std::vector<int>& members) const {
    double rear = min_member_along(members);
    std::vector<int> ids;
    for (const auto& o : sc_.obstacles) {
      if (detail::max_along(o, frame_) <= rear) continue;
      bool in_range = false;
      for (int id : members) {
        if (o.boundary_distance(agents_[static_cast<size_t>(id)].pos) <=
            sc_.cfg.detection_range) {
          in_range = true;
          break;
        }
      }
      if (in_range) ids.push_back(o.id);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  bool any_obstacle_in_range() const {
    for (const auto& o : sc_.obstacles)
      for (const auto& a : agents_)
        if (o.boundary_distance(a.pos) <= sc_.cfg.detection_range) return true;
    return false;
  }

  std::vector<Obstacle> obstacles_by_ids(const std::vector<int>& ids) const {
    std::vector<Obstacle> out;
    for (int want : ids)
      for (const auto& o : sc_.obstacles)
        if (o.id == want) out.push_back(o);
    return out;
  }

  void phase_logic() {
    switch (phase_) {
      case Phase::Formation: {
        std::vector<int> all = all_ids();
        if (!active_ids(all).empty()) enter_disturbance();
        break;
      }
      case Phase::Disturbance: {
        std::vector<std::pair<std::vector<int>, std::string>> replans;
        for (auto& g : groups_) {
          auto active = active_ids(g.members);
          bool fresh = false;
          for (int id : active)
            if (!std::binary_search(g.planned_ids.begin(), g.planned_ids.end(), id))
              fresh = true;
          if (fresh) replans.emplace_back(g.members, g.tag);
        }
        for (const auto& [members, tag] : replans) {
          groups_.erase(std::find_if(groups_.begin(), groups_.end(),
                                     [&](const ActiveGroup& g) { return g.tag == tag; }));
          plan_scope(members, tag);
        }
        if (!any_obstacle_in_range()) enter_convergence();
        break;
      }
      case Phase::Convergence: {
        std::vector<int> all = all_ids();
        if (!active_ids(all).empty()) {
          enter_disturbance();
        } else if (reformation_converged(agents_, reform_.slots, slot_of_,
                                         sc_.cfg.converge_eps,
                                         sc_.cfg.formation.inter_agent_distance)) {
          enter_formation();
        } else if (tick_ - assign_tick_ >= kReassignPeriod) {
          // The entry assignment was optimal for where everyone stood when
          // the phase began, but bodies cannot cross, so a straggler can be
          // owed a slot on the far side of a settled crowd. Re-solving from
          // current positions hands that slot to whoever can actually reach
          // it and points the displaced agent somewhere nearby instead.
          assign_slots();
          assign_tick_ = tick_;
        }
        break;
      }
    }
  }

  std::vector<int> all_ids() const {
    std::vector<int> ids(agents_.size());
    for (size_t i = 0; i < ids.size(); ++i) ids[i] = agents_[i].id;
    return ids;
  }

  void enter_disturbance() {
    groups_.clear();
    ctl_.clear();
    set_phase(Phase::Disturbance);
    plan_scope(all_ids(), "N");
  }

  // Plans the transit of `members` past the obstacles currently active for
  // them: envelope blocks, build routes, pick a split, route the parts, and
  // nominate leaders. Child groups get tags parent + part index.
  void plan_scope(const std::vector<int>& members, const std::string& parent_tag) {
    auto active = active_ids(members);
    if (active.empty()) return;
    auto blocks = envelope_blocks(obstacles_by_ids(active), sc_.cfg.dist_safe, frame_);
    double clearance = sc_.cfg.dist_safe + sc_.cfg.clearance_margin;
    auto routes = build_routes(blocks, frame_, clearance);
    const int n_routes = population_factor(static_cast<int>(blocks.size()));
    if (static_cast<int>(routes.size()) != n_routes)
      throw std::logic_error("Engine: route count disagrees with the population factor");

    std::vector<AgentState> member_states;
    for (int id : members) member_states.push_back(agents_[static_cast<size_t>(id)]);

    std::map<int, int> route_of;
    std::vector<int> sizes;
    double predicted = 0.0;
    bool use_forced = first_plan_ && !opts_.forced_first_split.empty();
    if (opts_.policy == Policy::NearestLane) {
      route_of = nearest_lane_assignment(member_states, routes, frame_);
      sizes = sizes_of(route_of, n_routes);
      predicted = predict_transit_time(member_states, route_of, routes, sc_.obstacles,
                                       frame_, sc_.cfg.goal, sc_.cfg);
    } else if (use_forced) {
      sizes = opts_.forced_first_split;
      if (static_cast<int>(sizes.size()) != n_routes)
        throw std::invalid_argument("Engine: forced split has wrong part count");
      route_of = contiguous_assignment(member_states, frame_, sizes);
      predicted = predict_transit_time(member_states, route_of, routes, sc_.obstacles,
                                       frame_, sc_.cfg.goal, sc_.cfg);
      if (std::isinf(predicted))
        throw InfeasibleSplitError("Engine: forced split cannot transit");
    } else {
      auto splits = enumerate_splits(static_cast<int>(members.size()), n_routes);
      std::vector<SplitCandidate> candidates;
      candidates.reserve(splits.size());
      for (const auto& s : splits) {
        SplitCandidate c;
        c.sizes = s;
        c.predicted_time =
            predict_transit_time(member_states, contiguous_assignment(member_states, frame_, s),
                                 routes, sc_.obstacles, frame_, sc_.cfg.goal, sc_.cfg);
        candidates.push_back(std::move(c));
      }
      size_t best = select_plan(candidates);
      sizes = candidates[best].sizes;
      predicted = candidates[best].predicted_time;
      if (std::isinf(predicted))
        throw InfeasibleSplitError("Engine: no feasible split for the active blocks");
      route_of = contiguous_assignment(member_states, frame_, sizes);
    }
    first_plan_ = false;

    GroupingEvent ev;
    ev.tick = tick_;
    ev.parent_tag = parent_tag;
    ev.obstacle_ids = active;
    ev.sizes = sizes;
    ev.predicted_time = predicted;

    std::vector<int> order = lateral_order(member_states, frame_);
    std::map<std::string, std::vector<int>> by_tag;
    size_t at = 0;
    for (int r = 0; r < n_routes; ++r) {
      std::string tag = parent_tag + std::to_string(r + 1);
      ev.tags.push_back(tag);
      std::vector<int> part;
      for (int k = 0; k < sizes[static_cast<size_t>(r)]; ++k) part.push_back(order[at++]);
      if (part.empty()) continue;
      by_tag[tag] = part;
      ActiveGroup g;
      g.tag = tag;
      g.members = part;
      g.planned_ids = active;
      groups_.push_back(std::move(g));
    }
    ev.leaders = nominate_leaders(by_tag, agents_, frame_);
    for (auto& g : groups_) {
      auto it = ev.leaders.find(g.tag);
      if (it != ev.leaders.end()) g.leader = it->second;
    }
    for (const auto& [tag, ids] : by_tag)
      for (int id : ids) {
        agents_[static_cast<size_t>(id)].group_id = tag;
        agents_[static_cast<size_t>(id)].is_leader = (ev.leaders.at(tag) == id);
      }
    note_leader_set();
    ctl_.plan(members, routes, route_of, agents_, sc_.cfg);
    res_.events.push_back(std::move(ev));

    if (parent_tag == "N") {
      TransitRecord t;
      t.plan_tick = tick_;
      double front = routes.front().front_along, back = routes.front().back_along;
      for (const auto& r : routes) {
        front = std::min(front, r.front_along);
        back = std::max(back, r.back_along);
      }
      t.center_along = (front + back) / 2.0;
      t.members = members;
      res_.transits.push_back(std::move(t));
    }
  }

  void note_leader_set() {
    std::map<std::string, int> now;
    for (const auto& g : groups_) now[g.tag] = g.leader;
    if (now != leaders_) {
      leaders_ = now;
      res_.leader_change_ticks.push_back(tick_);
    }
  }

  void enter_convergence() {
    groups_.clear();
    ctl_.clear();
    leaders_.clear();
    for (auto& a : agents_) {
      a.group_id.reset();
      a.is_leader = false;
    }
    set_phase(Phase::Convergence);
    reform_ = next_swarm_location(agents_, sc_.cfg.goal, sc_.cfg.formation, sc_.cfg.lookahead);
    assign_slots();
    assign_tick_ = tick_;
  }

  void assign_slots() {
    std::vector<std::vector<double>> cost(agents_.size(),
                                          std::vector<double>(agents_.size(), 0.0));
    for (size_t i = 0; i < agents_.size(); ++i)
      for (size_t s = 0; s < reform_.slots.size(); ++s)
        cost[i][s] = (reform_.slots[s] - agents_[i].pos).norm_sq();
    slot_of_ = solve_assignment(cost).target_of;
    res_.reform_slots = reform_.slots;
    res_.reform_slot_of = slot_of_;
  }

  void enter_formation() {
    set_phase(Phase::Formation);
    Vec2 acc{0.0, 0.0};
    double spd = 0.0;
    for (size_t i = 0; i < agents_.size(); ++i) {
      acc += agents_[i].pos - slot_offset(slot_of_[i]);
      spd += agents_[i].speed();
    }
    anchor_ = acc / static_cast<double>(agents_.size());
    anchor_speed_ = std::min(sc_.cfg.nominal_speed,
                             spd / static_cast<double>(agents_.size()));
  }

  void set_phase(Phase p) {
    phase_ = p;
    for (auto& a : agents_) a.phase = p;
  }

  std::vector<MotionCommand> compute_commands() const {
    constexpr double kFormationGain = 1.0;   // 1/s, slot error feedback
    constexpr double kArrivalMargin = 0.8;   // fraction of accel_max for braking ramps
    std::vector<MotionCommand> cmds;
    cmds.reserve(agents_.size());
    const SwarmConfig& cfg = sc_.cfg;
    for (const auto& a : agents_) {
      if (phase_ == Phase::Disturbance) {
        cmds.push_back(ctl_.disturbance_command(a, agents_, sc_.obstacles, cfg));
        continue;
      }
      Vec2 heading;
      double desired = 0.0;
      if (phase_ == Phase::Formation) {
        Vec2 slot = anchor_ + slot_offset(slot_of_[static_cast<size_t>(a.id)]);
        Vec2 vdes = frame_.heading * anchor_speed_ + (slot - a.pos) * kFormationGain;
        heading = vdes.normalized();
        if (heading == Vec2{0.0, 0.0}) heading = frame_.heading;
        desired = std::min(vdes.norm(), cfg.nominal_speed + cfg.speed_margin);
        // A slow agent can face anywhere after a reformation; speeding up
        // before the turn completes would surge it sideways through the
        // formation, so thrust is withheld until the facing agrees.
        double sp = a.speed();
        if (sp >= 1e-9)
          desired *= std::clamp((a.vel / sp).dot(heading), 0.0, 1.0);
      } else {
        Vec2 target = reform_.slots.at(static_cast<size_t>(slot_of_[static_cast<size_t>(a.id)]));
        Vec2 err = target - a.pos;
        double d = err.norm();
        Vec2 aim = target;
        if (d > 1e-9) {
          // Parked traffic on the straight line to the slot would stall the
          // pursuit against the separation floor forever; skirt the nearest
          // such blocker on whichever side it is not.
          Vec2 u = err / d;
          constexpr double kBlockerSpeed = 0.5;  // m/s, "not going anywhere"
          const AgentState* block = nullptr;
          double best_fwd = std::numeric_limits<double>::infinity();
          for (const auto& o : agents_) {
            if (o.id == a.id || o.speed() >= kBlockerSpeed) continue;
            Vec2 w = o.pos - a.pos;
            double fwd = w.dot(u);
            if (fwd <= 1e-9 || fwd >= d) continue;
            if (std::abs(u.cross(w)) >= cfg.dist_safe + 0.75) continue;
            if (fwd < best_fwd) {
              best_fwd = fwd;
              block = &o;
            }
          }
          if (block) {
            Vec2 w = block->pos - a.pos;
            double dist = w.norm();
            double standoff = cfg.dist_safe + 1.0;
            if (dist > standoff) {
              // steer down the tangent of the blocker's standoff circle, on
              // the side the blocker already leans away from the slot line
              double alpha = std::asin(std::clamp(standoff / dist, 0.0, 1.0));
              double rot = u.cross(w) >= 0.0 ? -alpha : alpha;
              double cs = std::cos(rot), sn = std::sin(rot);
              Vec2 wn = w / dist;
              aim = a.pos + Vec2{wn.x * cs - wn.y * sn, wn.x * sn + wn.y * cs} *
                                (dist + standoff);
            } else {
              Vec2 n = u.cross(w) >= 0.0 ? u.perp_cw() : u.perp_ccw();
              aim = a.pos + n * standoff;
            }
          }
        }
        heading = (aim - a.pos).normalized();
        if (heading == Vec2{0.0, 0.0}) heading = frame_.heading;
        // The turn-rate term keeps the turning radius inside the remaining
        // distance; without it agents orbit their slot instead of parking.
        desired = std::min({cfg.nominal_speed,
                            std::sqrt(2.0 * kArrivalMargin * cfg.accel_max * d),
                            0.5 * cfg.turn_rate * std::max(d, (aim - a.pos).norm())});
      }
      auto steer = resolve_separation(a, agents_, frame_, cfg, desired, heading);
      heading = steer.heading;
      desired = obstacle_backstop(a, sc_.obstacles, cfg, steer.desired, heading);
      cmds.emplace_back(heading, desired, a, cfg);
    }
    return cmds;
  }

  void accumulate_energy() {
    std::vector<double> speeds(agents_.size());
    for (size_t i = 0; i < agents_.size(); ++i) speeds[i] = agents_[i].speed();
    res_.energy.accumulate(speeds, sc_.power, sc_.cfg.dt);
  }

  void close_transits() {
    for (auto& t : res_.transits) {
      if (t.closed()) continue;
      bool all_past = true;
      for (int id : t.members)
        if (frame_.along(agents_[static_cast<size_t>(id)].pos) <= t.center_along) {
          all_past = false;
          break;
        }
      if (all_past) t.pass_tick = tick_;
    }
  }

  bool at_goal() const {
    double r = sc_.cfg.goal_radius();
    for (size_t i = 0; i < agents_.size(); ++i) {
      Vec2 own = sc_.cfg.goal + slot_offset(slot_of_[i]);
      double own_d = distance(agents_[i].pos, own);
      if (own_d > r) return false;
      // The shape must have settled: nobody parked nearer to a neighbor's
      // slot than to their own.
      for (size_t s = 0; s < sc_.cfg.formation.slots.size(); ++s) {
        if (static_cast<int>(s) == slot_of_[i]) continue;
        if (distance(agents_[i].pos, sc_.cfg.goal + slot_offset(static_cast<int>(s))) < own_d)
          return false;
      }
    }
    return true;
  }

  void record_tick_outputs(long tick) {
    for (const auto& a : agents_) {
      TraceRow row;
      row.tick = tick;
      row.agent_id = a.id;
      row.x = a.pos.x;
      row.y = a.pos.y;
      row.speed = a.speed();
      row.phase = a.phase;
      row.group = a.group_id.value_or("-");
      res_.trace.push_back(std::move(row));
    }
    MetricsRow m;
    m.tick = tick;
    const size_t n = agents_.size();
    double sum = 0.0, sum2 = 0.0;
    for (const auto& a : agents_) {
      sum += a.speed();
      sum2 += a.speed() * a.speed();
    }
    m.mean_speed = sum / static_cast<double>(n);
    m.std_speed = std::sqrt(std::max(sum2 / static_cast<double>(n) -
                                     m.mean_speed * m.mean_speed, 0.0));
    double nn_sum = 0.0, nn_sum2 = 0.0;
    double min_pair = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < n; ++i) {
      double nn = std::numeric_limits<double>::infinity();
      for (size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        double d = distance(agents_[i].pos, agents_[j].pos);
        nn = std::min(nn, d);
        if (j > i) min_pair = std::min(min_pair, d);
      }
      nn_sum += nn;
      nn_sum2 += nn * nn;
    }
    m.mean_nn_dist = nn_sum / static_cast<double>(n);
    m.std_nn_dist = std::sqrt(std::max(nn_sum2 / static_cast<double>(n) -
                                       m.mean_nn_dist * m.mean_nn_dist, 0.0));
    m.min_pair_dist = min_pair;
    res_.metrics.push_back(m);
  }

  Scenario sc_;
  EngineOptions opts_;
  MissionFrame frame_;
  std::vector<AgentState> agents_;
  Phase phase_ = Phase::Formation;
  Vec2 anchor_;
  double anchor_speed_ = 0.0;
  std::vector<int> slot_of_;
  ReformTarget reform_;
  std::vector<ActiveGroup> groups_;
  DisturbanceController ctl_;
  std::map<std::string, int> leaders_;
  bool first_plan_ = true;
  bool ran_ = false;
  long tick_ = 0;
  long assign_tick_ = 0;
  static constexpr long kReassignPeriod = 50;  // ticks between assignment re-solves
  RunResult res_;
};

}  // namespace swarm
