#pragma once

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "swarm/engine.hpp"
#include "swarm/world.hpp"

namespace swarm {

using json = nlohmann::ordered_json;

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail_json {

inline void check_keys(const json& j, const std::string& path,
                       std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (item.key() == a) {
        known = true;
        break;
      }
    if (!known)
      throw ScenarioError("unknown key \"" + item.key() + "\" at " + path);
  }
}

inline const json& member(const json& j, const char* key) { return j.at(key); }

inline double as_num(const json& j, const std::string& path) {
  if (!j.is_number()) throw ScenarioError("expected a number at " + path);
  return j.get<double>();
}

inline int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ScenarioError("expected an integer at " + path);
  return j.get<int>();
}

inline unsigned as_uint(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0)
    throw ScenarioError("expected a non-negative integer at " + path);
  return j.get<unsigned>();
}

inline std::string as_str(const json& j, const std::string& path) {
  if (!j.is_string()) throw ScenarioError("expected a string at " + path);
  return j.get<std::string>();
}

inline Vec2 as_vec(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2)
    throw ScenarioError("expected [x, y] at " + path);
  return {as_num(j[0], path + "[0]"), as_num(j[1], path + "[1]")};
}

inline void object_at(const json& j, const std::string& path) {
  if (!j.is_object()) throw ScenarioError("expected an object at " + path);
}

}  // namespace detail_json

// Builds a Scenario from its JSON form. Every key is optional and falls back
// to the built-in defaults, but unknown keys are rejected with the offending
// key and its location, so typos cannot silently change a run.
inline Scenario scenario_from_json(const json& root) {
  using namespace detail_json;
  if (!root.is_object()) throw ScenarioError("expected an object at $");
  check_keys(root, "$", {"name", "seed", "swarm", "formation", "obstacles", "sim",
                         "experiment", "power_model"});
  Scenario s;
  if (root.contains("name")) s.name = as_str(root.at("name"), "$.name");
  if (root.contains("seed")) s.seed = as_uint(root.at("seed"), "$.seed");

  SwarmConfig& c = s.cfg;
  if (root.contains("swarm")) {
    const json& j = root.at("swarm");
    object_at(j, "$.swarm");
    check_keys(j, "$.swarm",
               {"n_agents", "nominal_speed", "speed_margin", "speed_cap", "accel_max",
                "turn_rate", "detection_range", "dist_safe", "grav", "drag_coeff",
                "react_time", "clearance_margin", "ease_band", "start", "goal"});
    auto num = [&](const char* key, double& out) {
      if (j.contains(key)) out = as_num(j.at(key), std::string("$.swarm.") + key);
    };
    if (j.contains("n_agents")) c.n_agents = as_int(j.at("n_agents"), "$.swarm.n_agents");
    num("nominal_speed", c.nominal_speed);
    num("speed_margin", c.speed_margin);
    num("speed_cap", c.speed_cap);
    num("accel_max", c.accel_max);
    num("turn_rate", c.turn_rate);
    num("detection_range", c.detection_range);
    num("dist_safe", c.dist_safe);
    num("grav", c.grav);
    num("drag_coeff", c.drag_coeff);
    num("react_time", c.react_time);
    num("clearance_margin", c.clearance_margin);
    num("ease_band", c.ease_band);
    if (j.contains("start")) c.start_anchor = as_vec(j.at("start"), "$.swarm.start");
    if (j.contains("goal")) c.goal = as_vec(j.at("goal"), "$.swarm.goal");
  }

  double spacing = 4.0;
  std::string ftype = "nested_v";
  if (root.contains("formation")) {
    const json& j = root.at("formation");
    object_at(j, "$.formation");
    check_keys(j, "$.formation", {"type", "spacing", "slots", "heading"});
    if (j.contains("type")) ftype = as_str(j.at("type"), "$.formation.type");
    if (j.contains("spacing")) spacing = as_num(j.at("spacing"), "$.formation.spacing");
    if (ftype == "custom") {
      if (!j.contains("slots"))
        throw ScenarioError("custom formation needs \"slots\" at $.formation");
      const json& sl = j.at("slots");
      if (!sl.is_array()) throw ScenarioError("expected an array at $.formation.slots");
      FormationSpec f;
      f.inter_agent_distance = spacing;
      for (size_t i = 0; i < sl.size(); ++i)
        f.slots.push_back(as_vec(sl[i], "$.formation.slots[" + std::to_string(i) + "]"));
      if (j.contains("heading")) f.heading = as_vec(j.at("heading"), "$.formation.heading");
      c.formation = f;
    } else if (ftype == "nested_v") {
      if (j.contains("slots") || j.contains("heading"))
        throw ScenarioError("nested_v formation generates its own slots at $.formation");
      c.formation = nested_v_formation(c.n_agents, spacing);
    } else {
      throw ScenarioError("unknown formation type \"" + ftype + "\" at $.formation.type");
    }
  } else {
    c.formation = nested_v_formation(c.n_agents, spacing);
  }

  if (root.contains("obstacles")) {
    const json& arr = root.at("obstacles");
    if (!arr.is_array()) throw ScenarioError("expected an array at $.obstacles");
    for (size_t i = 0; i < arr.size(); ++i) {
      std::string p = "$.obstacles[" + std::to_string(i) + "]";
      const json& j = arr[i];
      object_at(j, p);
      check_keys(j, p, {"id", "center", "half_width", "half_depth"});
      for (const char* key : {"id", "center", "half_width", "half_depth"})
        if (!j.contains(key))
          throw ScenarioError("missing key \"" + std::string(key) + "\" at " + p);
      double hw = as_num(j.at("half_width"), p + ".half_width");
      double hd = as_num(j.at("half_depth"), p + ".half_depth");
      if (!(hw > 0.0)) throw ScenarioError("half_width must be > 0 at " + p);
      if (!(hd > 0.0)) throw ScenarioError("half_depth must be > 0 at " + p);
      s.obstacles.emplace_back(as_int(j.at("id"), p + ".id"),
                               as_vec(j.at("center"), p + ".center"), hw, hd);
    }
  }

  if (root.contains("sim")) {
    const json& j = root.at("sim");
    object_at(j, "$.sim");
    check_keys(j, "$.sim", {"dt", "lookahead", "converge_eps"});
    if (j.contains("dt")) c.dt = as_num(j.at("dt"), "$.sim.dt");
    if (j.contains("lookahead")) c.lookahead = as_num(j.at("lookahead"), "$.sim.lookahead");
    if (j.contains("converge_eps"))
      c.converge_eps = as_num(j.at("converge_eps"), "$.sim.converge_eps");
  }

  if (root.contains("experiment")) {
    const json& j = root.at("experiment");
    object_at(j, "$.experiment");
    check_keys(j, "$.experiment", {"mode", "time_budget", "out_dir"});
    if (j.contains("mode")) {
      s.mode = as_str(j.at("mode"), "$.experiment.mode");
      if (s.mode != "single" && s.mode != "sweep" && s.mode != "compare")
        throw ScenarioError("mode must be single, sweep or compare at $.experiment.mode");
    }
    if (j.contains("time_budget"))
      c.time_budget = as_num(j.at("time_budget"), "$.experiment.time_budget");
    if (j.contains("out_dir")) s.out_dir = as_str(j.at("out_dir"), "$.experiment.out_dir");
  }

  if (root.contains("power_model")) {
    const json& arr = root.at("power_model");
    if (!arr.is_array()) throw ScenarioError("expected an array at $.power_model");
    std::vector<std::pair<double, double>> samples;
    for (size_t i = 0; i < arr.size(); ++i) {
      std::string p = "$.power_model[" + std::to_string(i) + "]";
      Vec2 v = detail_json::as_vec(arr[i], p);
      samples.emplace_back(v.x, v.y);
    }
    try {
      s.power = PowerModel(std::move(samples));
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(std::string(e.what()) + " at $.power_model");
    }
  }

  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  }
  return s;
}

// Fully resolved JSON form: every setting appears with its effective value,
// so the emitted document doubles as the run's configuration echo.
// scenario_from_json(scenario_to_json(s)) reproduces s exactly.
inline json scenario_to_json(const Scenario& s) {
  const SwarmConfig& c = s.cfg;
  json root = json::object();
  root["name"] = s.name;
  root["seed"] = s.seed;
  json sw = json::object();
  sw["n_agents"] = c.n_agents;
  sw["nominal_speed"] = c.nominal_speed;
  sw["speed_margin"] = c.speed_margin;
  sw["speed_cap"] = c.speed_cap;
  sw["accel_max"] = c.accel_max;
  sw["turn_rate"] = c.turn_rate;
  sw["detection_range"] = c.detection_range;
  sw["dist_safe"] = c.dist_safe;
  sw["grav"] = c.grav;
  sw["drag_coeff"] = c.drag_coeff;
  sw["react_time"] = c.react_time;
  sw["clearance_margin"] = c.clearance_margin;
  sw["ease_band"] = c.ease_band;
  sw["start"] = json::array({c.start_anchor.x, c.start_anchor.y});
  sw["goal"] = json::array({c.goal.x, c.goal.y});
  root["swarm"] = std::move(sw);

  json f = json::object();
  bool generated = c.n_agents >= 1 && c.n_agents <= 12 &&
                   c.formation == nested_v_formation(c.n_agents, c.formation.inter_agent_distance);
  if (generated) {
    f["type"] = "nested_v";
    f["spacing"] = c.formation.inter_agent_distance;
  } else {
    f["type"] = "custom";
    f["spacing"] = c.formation.inter_agent_distance;
    json slots = json::array();
    for (const auto& v : c.formation.slots) slots.push_back(json::array({v.x, v.y}));
    f["slots"] = std::move(slots);
    f["heading"] = json::array({c.formation.heading.x, c.formation.heading.y});
  }
  root["formation"] = std::move(f);

  json obstacles = json::array();
  for (const auto& o : s.obstacles) {
    json j = json::object();
    j["id"] = o.id;
    j["center"] = json::array({o.center.x, o.center.y});
    j["half_width"] = o.half_width;
    j["half_depth"] = o.half_depth;
    obstacles.push_back(std::move(j));
  }
  root["obstacles"] = std::move(obstacles);

  json sim = json::object();
  sim["dt"] = c.dt;
  sim["lookahead"] = c.lookahead;
  sim["converge_eps"] = c.converge_eps;
  root["sim"] = std::move(sim);

  json ex = json::object();
  ex["mode"] = s.mode;
  ex["time_budget"] = c.time_budget;
  ex["out_dir"] = s.out_dir;
  root["experiment"] = std::move(ex);

  json pm = json::array();
  for (const auto& [v, p] : s.power.samples()) pm.push_back(json::array({v, p}));
  root["power_model"] = std::move(pm);
  return root;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError(path + ": " + e.what());
  }
  return scenario_from_json(root);
}

inline void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ScenarioError("cannot write scenario file: " + path);
  out << scenario_to_json(s).dump(2) << "\n";
}

}  // namespace swarm
