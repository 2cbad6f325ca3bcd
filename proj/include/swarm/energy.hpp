#pragma once

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

namespace swarm {

// Piecewise-linear power-vs-speed curve. The default is shaped like a small
// multirotor's: expensive hover, a single most-efficient cruise speed, and a
// steep climb toward the top of the envelope. The rise past the minimum is
// kept steeper than power/speed at the minimum so cruising at the minimum is
// also the cheapest way to cover distance.
class PowerModel {
 public:
  PowerModel() : PowerModel(default_samples()) {}

  explicit PowerModel(std::vector<std::pair<double, double>> samples)
      : samples_(std::move(samples)) {
    if (samples_.size() < 3)
      throw std::invalid_argument("PowerModel: need at least 3 samples");
    for (size_t i = 0; i < samples_.size(); ++i) {
      if (!(samples_[i].second > 0.0))
        throw std::invalid_argument("PowerModel: powers must be positive");
      if (i > 0 && !(samples_[i].first > samples_[i - 1].first))
        throw std::invalid_argument("PowerModel: speeds must be strictly increasing");
    }
    size_t m = 0;
    for (size_t i = 1; i < samples_.size(); ++i)
      if (samples_[i].second < samples_[m].second) m = i;
    if (m == 0 || m + 1 == samples_.size())
      throw std::invalid_argument("PowerModel: minimum must be interior");
    for (size_t i = 0; i < samples_.size() - 1; ++i) {
      bool down = samples_[i + 1].second < samples_[i].second;
      if ((i < m) != down)
        throw std::invalid_argument("PowerModel: curve must fall to a single minimum then rise");
    }
    endurance_speed_ = samples_[m].first;
  }

  static std::vector<std::pair<double, double>> default_samples() {
    return {{0.0, 320.0}, {2.0, 275.0}, {4.0, 235.0}, {6.0, 205.0},
            {8.0, 182.0}, {10.0, 170.0}, {12.0, 210.0}, {14.0, 260.0},
            {16.0, 320.0}, {18.0, 395.0}, {20.0, 480.0}};
  }

  // Linear interpolation between samples; clamped to the end values outside
  // the sampled range.
  double power_at(double speed) const {
    if (speed < 0.0) throw std::invalid_argument("power_at: negative speed");
    if (speed <= samples_.front().first) return samples_.front().second;
    if (speed >= samples_.back().first) return samples_.back().second;
    auto it = std::upper_bound(
        samples_.begin(), samples_.end(), speed,
        [](double s, const std::pair<double, double>& p) { return s < p.first; });
    auto lo = *(it - 1);
    auto hi = *it;
    double t = (speed - lo.first) / (hi.first - lo.first);
    return lo.second + t * (hi.second - lo.second);
  }

  double endurance_speed() const { return endurance_speed_; }
  const std::vector<std::pair<double, double>>& samples() const { return samples_; }

  bool operator==(const PowerModel& o) const { return samples_ == o.samples_; }

 private:
  std::vector<std::pair<double, double>> samples_;
  double endurance_speed_ = 0.0;
};

// Per-agent energy integration: E += P(speed) * dt each tick.
struct EnergyLedger {
  std::vector<double> per_agent;  // J
  double start_time = 0.0;
  double end_time = 0.0;

  explicit EnergyLedger(int n = 0) : per_agent(static_cast<size_t>(n), 0.0) {}

  void accumulate(const std::vector<double>& speeds, const PowerModel& model, double dt) {
    if (speeds.size() != per_agent.size())
      throw std::invalid_argument("EnergyLedger: speed count mismatch");
    if (!(dt > 0.0)) throw std::invalid_argument("EnergyLedger: dt must be > 0");
    for (size_t i = 0; i < speeds.size(); ++i)
      per_agent[i] += model.power_at(speeds[i]) * dt;
    end_time += dt;
  }

  double total() const {
    double t = 0.0;
    for (double e : per_agent) t += e;
    return t;
  }
};

// Percentage saved by run `a` relative to run `b`: positive when b spent more.
inline double energy_saving_percent(double energy_a, double energy_b) {
  if (!(energy_a > 0.0)) throw std::invalid_argument("energy_saving_percent: non-positive reference");
  return (energy_b - energy_a) / energy_a * 100.0;
}

}  // namespace swarm
