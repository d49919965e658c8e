#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mhs {

/// Slot length in seconds; one video chunk (GOP) per slot.
inline constexpr double kSlotSeconds = 0.5;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// A track vertex; `speed` (m/s) applies to the leg that starts here.
struct Waypoint {
  Point at;
  double speed = 0.0;
};

/// Piecewise-linear constant-speed path. A single waypoint is a static user.
class Track {
 public:
  Track() = default;
  explicit Track(std::vector<Waypoint> waypoints) : waypoints_(std::move(waypoints)) {
    if (waypoints_.empty()) throw std::invalid_argument("Track: at least one waypoint required");
    for (const auto& w : waypoints_) {
      if (!(w.speed >= 0.0) || !std::isfinite(w.speed))
        throw std::invalid_argument("Track: waypoint speed must be finite and >= 0");
    }
  }

  static Track stationary(Point p) { return Track({Waypoint{p, 0.0}}); }

  const std::vector<Waypoint>& waypoints() const { return waypoints_; }

  bool is_mobile() const {
    for (std::size_t i = 0; i + 1 < waypoints_.size(); ++i) {
      if (waypoints_[i].speed > 0.0 && distance(waypoints_[i].at, waypoints_[i + 1].at) > 0.0) return true;
    }
    return false;
  }

  /// Position after `seconds` of travel. A zero-speed leg halts the user there.
  Point position_at(double seconds) const {
    double remaining = seconds;
    for (std::size_t i = 0; i + 1 < waypoints_.size(); ++i) {
      const auto& from = waypoints_[i];
      const auto& to = waypoints_[i + 1];
      if (from.speed <= 0.0) return from.at;
      const double len = distance(from.at, to.at);
      const double leg_time = len / from.speed;
      if (remaining < leg_time) {
        const double f = remaining / leg_time;
        return {from.at.x + f * (to.at.x - from.at.x), from.at.y + f * (to.at.y - from.at.y)};
      }
      remaining -= leg_time;
    }
    return waypoints_.back().at;
  }

 private:
  std::vector<Waypoint> waypoints_;
};

struct Area {
  double width = 0.0;
  double height = 0.0;

  bool contains(Point p) const { return p.x >= 0.0 && p.y >= 0.0 && p.x <= width && p.y <= height; }
};

struct Topology {
  Area area;
  std::vector<Point> helpers;
  std::vector<Track> users;

  std::size_t helper_count() const { return helpers.size(); }
  std::size_t user_count() const { return users.size(); }

  void validate() const {
    if (helpers.empty()) throw std::invalid_argument("topology: at least one helper required");
    if (!(area.width > 0.0) || !(area.height > 0.0)) throw std::invalid_argument("topology: area must be positive");
    for (std::size_t h = 0; h < helpers.size(); ++h) {
      if (!area.contains(helpers[h])) throw std::invalid_argument("topology: helper " + std::to_string(h) + " outside area");
    }
    for (std::size_t u = 0; u < users.size(); ++u) {
      for (const auto& w : users[u].waypoints()) {
        if (!area.contains(w.at)) throw std::invalid_argument("topology: user " + std::to_string(u) + " waypoint outside area");
      }
    }
  }
};

/// Helpers at the centres of a rows x cols grid of square cells, numbered left to
/// right then bottom to top.
inline Topology grid_topology(std::size_t rows, std::size_t cols, double cell_side) {
  if (rows == 0 || cols == 0 || !(cell_side > 0.0)) throw std::invalid_argument("grid_topology: bad grid");
  Topology topo;
  topo.area = {cols * cell_side, rows * cell_side};
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      topo.helpers.push_back({(c + 0.5) * cell_side, (r + 0.5) * cell_side});
    }
  }
  return topo;
}

/// User positions at slot t.
inline std::vector<Point> advance_mobility(const Topology& topo, long slot) {
  std::vector<Point> out;
  out.reserve(topo.users.size());
  const double seconds = static_cast<double>(slot) * kSlotSeconds;
  for (const auto& track : topo.users) out.push_back(track.position_at(seconds));
  return out;
}

}  // namespace mhs
