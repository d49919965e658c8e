#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mhs/dpp.hpp"
#include "mhs/playback.hpp"
#include "mhs/rng.hpp"
#include "mhs/topology.hpp"
#include "mhs/video.hpp"

namespace mhs {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PolicyVariant { dpp_macro, dpp_unique, max_sinr };

inline std::string to_string(PolicyVariant v) {
  switch (v) {
    case PolicyVariant::dpp_macro: return "dpp-macro";
    case PolicyVariant::dpp_unique: return "dpp-unique";
    case PolicyVariant::max_sinr: return "max-sinr";
  }
  return "?";
}

inline PolicyVariant parse_policy(std::string_view s) {
  if (s == "dpp-macro") return PolicyVariant::dpp_macro;
  if (s == "dpp-unique") return PolicyVariant::dpp_unique;
  if (s == "max-sinr") return PolicyVariant::max_sinr;
  throw ConfigError("unknown policy '" + std::string(s) + "' (expected dpp-macro, dpp-unique or max-sinr)");
}

/// Rectangle in which users are placed uniformly at random.
struct Region {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

/// Helper layout and user tracks; random users are placed when the topology is
/// built for a particular seed.
struct TopologySpec {
  std::size_t grid_rows = 0;
  std::size_t grid_cols = 0;
  double cell_side = 5.0;
  std::vector<Point> helpers;  // explicit layout, used when grid is unset
  std::optional<Area> area;
  std::vector<Track> tracks;   // explicit users come first, in file order
  std::size_t random_users = 0;
  std::optional<Region> random_region;

  Topology build(Rng& rng) const {
    Topology topo;
    if (grid_rows > 0) {
      topo = grid_topology(grid_rows, grid_cols, cell_side);
      if (area) topo.area = *area;
    } else {
      if (!area) throw ConfigError("topology: explicit helpers need 'area'");
      topo.area = *area;
      topo.helpers = helpers;
    }
    topo.users = tracks;
    const Region r = random_region.value_or(Region{0, 0, topo.area.width, topo.area.height});
    std::uniform_real_distribution<double> ux(r.x0, r.x1), uy(r.y0, r.y1);
    for (std::size_t i = 0; i < random_users; ++i) {
      const double x = ux(rng);
      const double y = uy(rng);
      topo.users.push_back(Track::stationary({x, y}));
    }
    topo.validate();
    return topo;
  }
};

/// Either a profile file or a synthetic recipe.
struct VideoSpec {
  std::string profile_path;
  std::size_t length = 800;
  std::vector<ProfileSegment> segments;

  VideoProfile build(Rng& rng) const {
    if (!profile_path.empty()) return load_profile(profile_path);
    return synth_profile(length, segments, rng);
  }
};

struct SessionSpec {
  std::size_t length = 1000;         // chunks per session
  double start_probability = 0.005;  // p: per-slot idle -> active
  std::size_t max_sessions = 0;      // per user, 0 = unlimited
  bool mobile_start_immediately = true;
};

struct RunSpec {
  long horizon = 3000;
  double edge_threshold_bits = 1e6;
  double symbols_per_slot = 1e5 * 84;
  double power = 1e8;
  double carrier_ghz = 5.0;
  std::uint64_t seed = 1;
  bool stop_when_idle = false;
  std::optional<std::size_t> trace_user;
  std::optional<std::size_t> helper_trace_user;  // defaults to the first mobile user
};

struct SimConfig {
  TopologySpec topology;
  VideoSpec video;
  PolicyVariant policy = PolicyVariant::dpp_macro;
  DppParams dpp{1e13, 1.0, 1.0};
  PlaybackParams playback{50.0, 25.0, 10};
  SessionSpec sessions;
  RunSpec run;

  void validate() const {
    dpp.validate();
    playback.validate();
    if (!(sessions.start_probability >= 0.0 && sessions.start_probability <= 1.0))
      throw ConfigError("sessions: start_probability must lie in [0,1]");
    if (sessions.length == 0) throw ConfigError("sessions: length must be >= 1");
    if (run.horizon < 1) throw ConfigError("run: horizon must be >= 1");
    if (!(run.symbols_per_slot > 0.0)) throw ConfigError("run: symbols_per_slot must be positive");
    if (!(run.power > 0.0)) throw ConfigError("run: power must be positive");
    if (!(run.edge_threshold_bits >= 0.0)) throw ConfigError("run: edge_threshold_bits must be >= 0");
    if (!(run.carrier_ghz > 0.0)) throw ConfigError("run: carrier_ghz must be positive");
    if (topology.grid_rows == 0 && topology.helpers.empty()) throw ConfigError("topology: no helpers (set grid or helper)");
    if (video.profile_path.empty() && video.segments.empty()) throw ConfigError("video: set profile or at least one segment");
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct Entry {
  std::string value;
  std::size_t line = 0;
};

class ValueReader {
 public:
  ValueReader(const std::string& section, const std::string& key, const Entry& e) : where_("line " + std::to_string(e.line) + " [" + section + "] " + key), value_(e.value) {}

  double number(std::string_view text) const {
    const std::string t = trim(text);
    if (t == "inf" || t == "infinity") return std::numeric_limits<double>::infinity();
    try {
      std::size_t pos = 0;
      const double v = std::stod(t, &pos);
      if (pos != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(where_ + ": expected a number, got '" + t + "'");
    }
  }
  double number() const { return number(value_); }

  std::size_t count(std::string_view text) const { return count_value(number(text)); }
  std::size_t count_value(double v) const {
    if (v < 0 || v != std::floor(v) || !std::isfinite(v)) throw ConfigError(where_ + ": expected a non-negative integer");
    return static_cast<std::size_t>(v);
  }
  std::size_t count() const { return count(value_); }

  bool boolean() const {
    if (value_ == "true" || value_ == "yes" || value_ == "1") return true;
    if (value_ == "false" || value_ == "no" || value_ == "0") return false;
    throw ConfigError(where_ + ": expected true or false");
  }

  std::vector<double> numbers(std::size_t expected) const {
    const auto parts = split(value_, ',');
    if (parts.size() != expected) throw ConfigError(where_ + ": expected " + std::to_string(expected) + " comma-separated numbers");
    std::vector<double> out;
    for (const auto& p : parts) out.push_back(number(p));
    return out;
  }

  const std::string& text() const { return value_; }
  const std::string& where() const { return where_; }

 private:
  std::string where_;
  std::string value_;
};

}  // namespace detail

/// Parses the sectioned `key = value` format:
///
///   [topology]  grid = RxC, cell_side, helper = x,y (repeatable), area = w,h,
///               user = x,y,speed; x,y,speed; ... (repeatable), random_users,
///               random_region = x0,y0,x1,y1
///   [video]     profile = path | length + segment = chunks,modes,size_lo,size_hi,q_lo,q_hi
///   [policy]    variant, V, alpha, rho, xi, delta, queue_unit_bits
///   [sessions]  length, start_probability, max_sessions, mobile_start_immediately
///   [run]       horizon, seed, edge_threshold_bits, symbols_per_slot, power,
///               carrier_ghz, stop_when_idle, trace_user, helper_trace_user
///
/// '#' starts a comment. Unknown sections and keys are rejected.
inline SimConfig parse_config(std::istream& in, const std::string& base_dir = {}) {
  using detail::Entry;
  static const std::map<std::string, std::set<std::string>> allowed{
      {"topology", {"grid", "cell_side", "helper", "area", "user", "random_users", "random_region"}},
      {"video", {"profile", "length", "segment"}},
      {"policy", {"variant", "V", "alpha", "rho", "xi", "delta", "queue_unit_bits"}},
      {"sessions", {"length", "start_probability", "max_sessions", "mobile_start_immediately"}},
      {"run", {"horizon", "seed", "edge_threshold_bits", "symbols_per_slot", "power", "carrier_ghz", "stop_when_idle",
               "trace_user", "helper_trace_user"}},
  };
  static const std::set<std::string> repeatable{"helper", "user", "segment"};

  std::map<std::string, std::multimap<std::string, Entry>> doc;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      section = detail::trim(std::string_view(t).substr(1, t.size() - 2));
      if (!allowed.count(section)) throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    if (section.empty()) throw ConfigError("line " + std::to_string(line_no) + ": key outside of a section");
    const std::string key = detail::trim(std::string_view(t).substr(0, eq));
    const std::string value = detail::trim(std::string_view(t).substr(eq + 1));
    if (!allowed.at(section).count(key)) throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "' in [" + section + "]");
    auto& sec = doc[section];
    if (sec.count(key) && !repeatable.count(key)) throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    sec.emplace(key, Entry{value, line_no});
  }

  SimConfig cfg;
  auto each = [&](const std::string& sec, const std::string& key, auto&& fn) {
    const auto it = doc.find(sec);
    if (it == doc.end()) return;
    auto [b, e] = it->second.equal_range(key);
    for (auto i = b; i != e; ++i) fn(detail::ValueReader(sec, key, i->second));
  };

  each("topology", "grid", [&](const detail::ValueReader& r) {
    const auto parts = detail::split(r.text(), 'x');
    if (parts.size() != 2) throw ConfigError(r.where() + ": expected ROWSxCOLS");
    cfg.topology.grid_rows = r.count(parts[0]);
    cfg.topology.grid_cols = r.count(parts[1]);
    if (cfg.topology.grid_rows == 0 || cfg.topology.grid_cols == 0) throw ConfigError(r.where() + ": grid must be non-empty");
  });
  each("topology", "cell_side", [&](const detail::ValueReader& r) { cfg.topology.cell_side = r.number(); });
  each("topology", "helper", [&](const detail::ValueReader& r) {
    const auto v = r.numbers(2);
    cfg.topology.helpers.push_back({v[0], v[1]});
  });
  each("topology", "area", [&](const detail::ValueReader& r) {
    const auto v = r.numbers(2);
    cfg.topology.area = Area{v[0], v[1]};
  });
  each("topology", "user", [&](const detail::ValueReader& r) {
    std::vector<Waypoint> wps;
    for (const auto& wp : detail::split(r.text(), ';')) {
      const auto parts = detail::split(wp, ',');
      if (parts.size() != 3) throw ConfigError(r.where() + ": waypoint must be x,y,speed");
      wps.push_back({{r.number(parts[0]), r.number(parts[1])}, r.number(parts[2])});
    }
    try {
      cfg.topology.tracks.emplace_back(std::move(wps));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(r.where() + ": " + e.what());
    }
  });
  each("topology", "random_users", [&](const detail::ValueReader& r) { cfg.topology.random_users = r.count(); });
  each("topology", "random_region", [&](const detail::ValueReader& r) {
    const auto v = r.numbers(4);
    cfg.topology.random_region = Region{v[0], v[1], v[2], v[3]};
  });

  each("video", "profile", [&](const detail::ValueReader& r) {
    std::string p = r.text();
    if (!base_dir.empty() && !p.empty() && p.front() != '/') p = base_dir + "/" + p;
    cfg.video.profile_path = p;
  });
  each("video", "length", [&](const detail::ValueReader& r) { cfg.video.length = r.count(); });
  each("video", "segment", [&](const detail::ValueReader& r) {
    const auto v = r.numbers(6);
    cfg.video.segments.push_back({r.count_value(v[0]), r.count_value(v[1]), v[2], v[3], v[4], v[5]});
  });

  each("policy", "variant", [&](const detail::ValueReader& r) { cfg.policy = parse_policy(r.text()); });
  each("policy", "V", [&](const detail::ValueReader& r) { cfg.dpp.v = r.number(); });
  each("policy", "alpha", [&](const detail::ValueReader& r) { cfg.dpp.alpha = r.number(); });
  each("policy", "queue_unit_bits", [&](const detail::ValueReader& r) { cfg.dpp.queue_unit_bits = r.number(); });
  each("policy", "rho", [&](const detail::ValueReader& r) { cfg.playback.rho = r.number(); });
  each("policy", "xi", [&](const detail::ValueReader& r) { cfg.playback.xi = r.number(); });
  each("policy", "delta", [&](const detail::ValueReader& r) { cfg.playback.delta = static_cast<long>(r.count()); });

  each("sessions", "length", [&](const detail::ValueReader& r) { cfg.sessions.length = r.count(); });
  each("sessions", "start_probability", [&](const detail::ValueReader& r) { cfg.sessions.start_probability = r.number(); });
  each("sessions", "max_sessions", [&](const detail::ValueReader& r) { cfg.sessions.max_sessions = r.count(); });
  each("sessions", "mobile_start_immediately", [&](const detail::ValueReader& r) { cfg.sessions.mobile_start_immediately = r.boolean(); });

  each("run", "horizon", [&](const detail::ValueReader& r) { cfg.run.horizon = static_cast<long>(r.count()); });
  each("run", "seed", [&](const detail::ValueReader& r) { cfg.run.seed = r.count(); });
  each("run", "edge_threshold_bits", [&](const detail::ValueReader& r) { cfg.run.edge_threshold_bits = r.number(); });
  each("run", "symbols_per_slot", [&](const detail::ValueReader& r) { cfg.run.symbols_per_slot = r.number(); });
  each("run", "power", [&](const detail::ValueReader& r) { cfg.run.power = r.number(); });
  each("run", "carrier_ghz", [&](const detail::ValueReader& r) { cfg.run.carrier_ghz = r.number(); });
  each("run", "stop_when_idle", [&](const detail::ValueReader& r) { cfg.run.stop_when_idle = r.boolean(); });
  each("run", "trace_user", [&](const detail::ValueReader& r) { cfg.run.trace_user = r.count(); });
  each("run", "helper_trace_user", [&](const detail::ValueReader& r) { cfg.run.helper_trace_user = r.count(); });

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

inline SimConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  const auto slash = path.find_last_of('/');
  return parse_config(in, slash == std::string::npos ? std::string{} : path.substr(0, slash));
}

}  // namespace mhs
