#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "mhs/config.hpp"
#include "mhs/dpp.hpp"
#include "mhs/playback.hpp"
#include "mhs/rate_table.hpp"
#include "mhs/rng.hpp"
#include "mhs/scheduler.hpp"
#include "mhs/topology.hpp"
#include "mhs/video.hpp"

namespace mhs {

struct SessionRecord {
  std::size_t user = 0;
  std::size_t serial = 0;  // per-user session number
  long start_slot = 0;     // global slot of the first request opportunity
  SessionMetrics metrics;
};

struct HelperTraceRow {
  std::size_t session = 0;
  std::size_t chunk = 0;
  std::size_t helper = 0;
  long slot = 0;  // global slot of the request
};

struct TraceRow {
  long slot = 0;  // global
  std::size_t session = 0;
  PlaybackEvent event;
};

struct MetricsReport {
  PolicyVariant policy = PolicyVariant::dpp_macro;
  std::size_t users = 0;
  std::size_t helpers = 0;
  std::vector<SessionRecord> sessions;
  /// Per slot: sum_hu Q_hu / queue_unit_bits + sum_u Theta_u.
  std::vector<double> total_backlog;
  /// Per slot: sum_hu Q_hu in bits.
  std::vector<double> queue_bits;
  std::vector<double> requested_quality_sum;  // per user
  std::vector<std::size_t> request_count;     // per user
  std::vector<HelperTraceRow> helper_trace;
  std::optional<std::size_t> helper_trace_user;
  std::vector<TraceRow> trace;
  std::size_t deferred_requests = 0;
  std::size_t duplicate_deliveries = 0;
  double max_conservation_error = 0.0;
  long slots_run = 0;
  double alpha = 1.0;

  double mean_total_backlog() const {
    if (total_backlog.empty()) return 0.0;
    double s = 0.0;
    for (double b : total_backlog) s += b;
    return s / static_cast<double>(total_backlog.size());
  }

  /// sum_u phi(time-averaged requested quality) over users that requested anything.
  double network_utility() const {
    double u = 0.0;
    for (std::size_t i = 0; i < request_count.size(); ++i) {
      if (request_count[i] == 0) continue;
      u += alpha_fair_utility(requested_quality_sum[i] / static_cast<double>(request_count[i]), alpha);
    }
    return u;
  }
};

/// Session statistics pooled over every session of one user.
struct UserSummary {
  std::size_t user = 0;
  std::size_t sessions = 0;
  double skipped_pct = 0.0;
  double mean_ssim = 0.0;
  double rebuf_frac = 0.0;
  double buffering_frac = 0.0;
  double underrun_rate = 0.0;
  std::size_t stalls = 0;
};

inline std::vector<UserSummary> summarize_users(const MetricsReport& report) {
  struct Acc {
    std::size_t sessions = 0, chunks = 0, skipped = 0, played = 0, resolved = 0, underruns = 0, stalls = 0;
    double ssim_sum = 0.0, rebuf_slots = 0.0, playback_slots = 0.0, buffering_slots = 0.0, session_slots = 0.0;
  };
  std::vector<Acc> acc(report.users);
  for (const auto& s : report.sessions) {
    auto& a = acc[s.user];
    const auto& m = s.metrics;
    ++a.sessions;
    a.skipped += m.skipped;
    a.chunks += m.complete ? m.resolved : std::max<std::size_t>(m.resolved, 1);
    a.played += m.on_time + m.late;
    a.ssim_sum += m.mean_ssim * static_cast<double>(m.on_time + m.late);
    a.resolved += m.resolved;
    a.underruns += m.skipped + m.late;
    a.stalls += m.stalls;
    a.rebuf_slots += static_cast<double>(m.rebuffer_slots);
    a.playback_slots += static_cast<double>(m.playback_slots);
    a.buffering_slots += static_cast<double>(m.prebuffer_slots_spent + m.rebuffer_slots);
    a.session_slots += static_cast<double>(m.session_slots);
  }
  std::vector<UserSummary> out;
  for (std::size_t u = 0; u < acc.size(); ++u) {
    const auto& a = acc[u];
    if (a.sessions == 0) continue;
    UserSummary s;
    s.user = u;
    s.sessions = a.sessions;
    s.skipped_pct = a.chunks ? 100.0 * static_cast<double>(a.skipped) / static_cast<double>(a.chunks) : 0.0;
    s.mean_ssim = a.played ? a.ssim_sum / static_cast<double>(a.played) : 0.0;
    s.rebuf_frac = a.playback_slots > 0 ? a.rebuf_slots / a.playback_slots : 0.0;
    s.buffering_frac = a.session_slots > 0 ? a.buffering_slots / a.session_slots : 0.0;
    s.underrun_rate = a.resolved ? static_cast<double>(a.underruns) / static_cast<double>(a.resolved) : 0.0;
    s.stalls = a.stalls;
    out.push_back(s);
  }
  return out;
}

/// Client-side association of the baseline: the neighbour with the largest peak
/// rate (smallest helper id on ties).
inline std::optional<std::size_t> max_sinr_helper(const RateTable& rates, std::size_t u) {
  std::optional<std::size_t> best;
  for (std::size_t h = 0; h < rates.peak_rate.rows(); ++h) {
    if (!rates.is_edge(h, u)) continue;
    if (!best || rates.peak_rate(h, u) > rates.peak_rate(*best, u)) best = h;
  }
  return best;
}

/// Slot-by-slot simulator: mobility and channel, session churn, per-user
/// congestion control, per-slot transmission scheduling, FIFO queue service and
/// playback bookkeeping.
class Simulator {
 public:
  explicit Simulator(const SimConfig& cfg)
      : cfg_(cfg),
        channel_rng_(make_stream(cfg.run.seed, "channel")),
        topology_([&] {
          auto r = make_stream(cfg.run.seed, "topology");
          return cfg.topology.build(r);
        }()),
        profile_([&] {
          auto r = make_stream(cfg.run.seed, "profile");
          return cfg.video.build(r);
        }()),
        bounds_(quality_bounds(profile_)),
        links_(topology_.helper_count(), topology_.user_count(), cfg.run.carrier_ghz),
        queues_(topology_.helper_count() * topology_.user_count()),
        powers_(topology_.helper_count(), cfg.run.power) {
    cfg_.validate();
    const std::size_t U = topology_.user_count();
    users_.resize(U);
    report_.policy = cfg.policy;
    report_.users = U;
    report_.helpers = topology_.helper_count();
    report_.alpha = cfg.dpp.alpha;
    report_.requested_quality_sum.assign(U, 0.0);
    report_.request_count.assign(U, 0);
    report_.helper_trace_user = cfg.run.helper_trace_user;
    if (!report_.helper_trace_user) {
      for (std::size_t u = 0; u < U; ++u)
        if (topology_.users[u].is_mobile()) {
          report_.helper_trace_user = u;
          break;
        }
    }
    for (std::size_t u = 0; u < U; ++u) {
      auto& ur = users_[u];
      ur.rng = make_stream(cfg.run.seed, "sessions", u);
      if (topology_.users[u].is_mobile() && cfg.sessions.mobile_start_immediately)
        ur.next_start = 0;
      else
        ur.next_start = draw_idle(ur.rng, 0);
    }
  }

  const Topology& topology() const { return topology_; }
  const VideoProfile& profile() const { return profile_; }
  const RateTable& rates() const { return rates_; }
  const LinkField& links() const { return links_; }
  long slot() const { return slot_; }
  const EdgeQueue& queue(std::size_t h, std::size_t u) const { return queues_[h * topology_.user_count() + u]; }
  double theta(std::size_t u) const { return users_[u].session ? users_[u].session->theta : 0.0; }
  bool active(std::size_t u) const { return users_[u].session.has_value(); }
  const PlaybackSession* playback(std::size_t u) const {
    return users_[u].session ? &users_[u].session->playback : nullptr;
  }
  const MetricsReport& report() const { return report_; }

  /// True once no session is running and none will start.
  bool idle_forever() const {
    for (const auto& u : users_)
      if (u.session || u.next_start) return false;
    return true;
  }

  MetricsReport run() {
    while (slot_ < cfg_.run.horizon) {
      if (cfg_.run.stop_when_idle && idle_forever()) break;
      step();
    }
    return finalize();
  }

  /// Advances one slot.
  void step() {
    const long t = slot_;
    const std::size_t H = topology_.helper_count();
    const std::size_t U = topology_.user_count();

    // 1. mobility, slow fading, peak rates, edges
    positions_ = advance_mobility(topology_, t);
    links_.resample(channel_rng_, topology_, positions_);
    rates_ = compute_rate_table(links_, powers_, RateParams{cfg_.run.symbols_per_slot, cfg_.run.edge_threshold_bits});

    // 2. session arrivals
    for (std::size_t u = 0; u < U; ++u) {
      auto& ur = users_[u];
      if (!ur.session && ur.next_start && *ur.next_start == t) start_session(u, t);
    }

    // 3. congestion control on the queue snapshot
    Matrix<double> backlog(H, U, 0.0);
    for (std::size_t h = 0; h < H; ++h)
      for (std::size_t u = 0; u < U; ++u) backlog(h, u) = queue(h, u).backlog();

    struct Arrival {
      std::size_t helper, user;
      ChunkTicket ticket;
    };
    std::vector<Arrival> arrivals;
    std::vector<HelperQueue> candidates;
    for (std::size_t u = 0; u < U; ++u) {
      auto& ur = users_[u];
      if (!ur.session || ur.session->next_chunk > cfg_.sessions.length) continue;
      auto& s = *ur.session;
      candidates.clear();
      if (cfg_.policy == PolicyVariant::max_sinr) {
        if (const auto best = max_sinr_helper(rates_, u)) candidates.push_back({*best, backlog(*best, u)});
      } else {
        for (std::size_t h = 0; h < H; ++h)
          if (rates_.is_edge(h, u)) candidates.push_back({h, backlog(h, u)});
      }
      const auto& modes = chunk_at(profile_, s.next_chunk, s.offset);
      const auto action = congestion_control_step(UserControlState{s.theta, bounds_}, cfg_.dpp, candidates, modes, H);
      if (!action) {
        ++report_.deferred_requests;
        continue;
      }
      const long local = t - s.start_slot + 1;
      const std::size_t k = s.next_chunk++;
      s.theta = action->theta_next;
      s.playback.on_request(k, local, action->requested_quality);
      ++s.outstanding;
      arrivals.push_back({action->helper, u, ChunkTicket{s.serial, k, modes[action->mode].size_bits}});
      report_.requested_quality_sum[u] += action->requested_quality;
      ++report_.request_count[u];
      if (report_.helper_trace_user && *report_.helper_trace_user == u)
        report_.helper_trace.push_back({s.serial, k, action->helper, t});
    }

    // 4. transmission scheduling; a backlogged pair stays servable after its edge drops
    Matrix<unsigned char> eligible(H, U, 0);
    for (std::size_t h = 0; h < H; ++h)
      for (std::size_t u = 0; u < U; ++u) eligible(h, u) = (rates_.is_edge(h, u) || backlog(h, u) > 0.0) ? 1 : 0;
    const ScheduleInput input{backlog, rates_.peak_rate, eligible, cfg_.run.symbols_per_slot};
    last_decision_ = cfg_.policy == PolicyVariant::dpp_unique ? schedule_unique_association(input)
                                                               : schedule_macro_diversity(input);

    // 5. queue service, then this slot's requests
    std::vector<ChunkTicket> completed;
    Matrix<double> delivered(H, U, 0.0), arrived(H, U, 0.0);
    for (std::size_t h = 0; h < H; ++h) {
      const auto u = last_decision_.user_of_helper[h];
      if (!u) continue;
      completed.clear();
      delivered(h, *u) = queue_mut(h, *u).serve(last_decision_.service_bits(h, *u), completed);
      for (const auto& c : completed) deliver(*u, c, t);
    }
    for (const auto& a : arrivals) {
      queue_mut(a.helper, a.user).push(a.ticket);
      arrived(a.helper, a.user) += a.ticket.bits;
    }
    for (std::size_t h = 0; h < H; ++h)
      for (std::size_t u = 0; u < U; ++u) {
        const double err = std::abs((queue(h, u).backlog() - backlog(h, u)) - (arrived(h, u) - delivered(h, u)));
        const double scale = std::max({1.0, backlog(h, u), arrived(h, u)});
        report_.max_conservation_error = std::max(report_.max_conservation_error, err / scale);
      }

    // 6. playback
    for (std::size_t u = 0; u < U; ++u) {
      auto& ur = users_[u];
      if (!ur.session) continue;
      auto& s = *ur.session;
      s.playback.advance_slot(t - s.start_slot + 1);
      if (s.next_chunk > cfg_.sessions.length && s.outstanding == 0 && s.playback.mode() == PlaybackMode::done)
        end_session(u, t);
    }

    // 7. backlog sample
    double q_bits = 0.0;
    for (const auto& q : queues_) q_bits += q.backlog();
    double theta_sum = 0.0;
    for (const auto& ur : users_)
      if (ur.session) theta_sum += ur.session->theta;
    report_.queue_bits.push_back(q_bits);
    report_.total_backlog.push_back(q_bits / cfg_.dpp.queue_unit_bits + theta_sum);

    ++slot_;
  }

  const ScheduleDecision& last_decision() const { return last_decision_; }

  /// Closes the report; sessions still running are recorded as incomplete.
  MetricsReport finalize() {
    for (std::size_t u = 0; u < users_.size(); ++u) {
      auto& ur = users_[u];
      if (!ur.session) continue;
      record_session(u);
    }
    report_.slots_run = slot_;
    return report_;
  }

 private:
  struct ActiveSession {
    std::size_t serial = 0;
    long start_slot = 0;
    std::size_t offset = 0;
    std::size_t next_chunk = 1;
    std::size_t outstanding = 0;
    double theta = 0.0;
    PlaybackSession playback;
  };

  struct UserRuntime {
    Rng rng;
    std::optional<long> next_start;
    std::size_t sessions_started = 0;
    std::optional<ActiveSession> session;
  };

  EdgeQueue& queue_mut(std::size_t h, std::size_t u) { return queues_[h * topology_.user_count() + u]; }

  std::optional<long> draw_idle(Rng& rng, long from) const {
    const double p = cfg_.sessions.start_probability;
    if (p <= 0.0) return std::nullopt;
    if (p >= 1.0) return from;
    std::geometric_distribution<long> idle(p);
    return from + idle(rng);
  }

  void start_session(std::size_t u, long t) {
    auto& ur = users_[u];
    std::uniform_int_distribution<std::size_t> pick(0, profile_.length() - 1);
    const bool traced = cfg_.run.trace_user && *cfg_.run.trace_user == u;
    ur.session.emplace(ActiveSession{ur.sessions_started, t, pick(ur.rng), 1, 0, 0.0,
                                     PlaybackSession(cfg_.sessions.length, cfg_.playback, traced)});
    ++ur.sessions_started;
    ur.next_start.reset();
  }

  void deliver(std::size_t u, const ChunkTicket& c, long t) {
    auto& ur = users_[u];
    if (!ur.session || ur.session->serial != c.session) return;
    auto& s = *ur.session;
    if (!s.playback.on_chunk_delivered(c.chunk, t - s.start_slot + 1)) ++report_.duplicate_deliveries;
    --s.outstanding;
  }

  void record_session(std::size_t u) {
    auto& ur = users_[u];
    const auto& s = *ur.session;
    report_.sessions.push_back({u, s.serial, s.start_slot, s.playback.metrics()});
    if (cfg_.run.trace_user && *cfg_.run.trace_user == u) {
      for (const auto& e : s.playback.events()) report_.trace.push_back({s.start_slot + e.slot - 1, s.serial, e});
    }
  }

  void end_session(std::size_t u, long t) {
    record_session(u);
    auto& ur = users_[u];
    ur.session.reset();
    if (cfg_.sessions.max_sessions == 0 || ur.sessions_started < cfg_.sessions.max_sessions)
      ur.next_start = draw_idle(ur.rng, t + 1);
  }

  SimConfig cfg_;
  Rng channel_rng_;
  Topology topology_;
  VideoProfile profile_;
  QualityBounds bounds_;
  LinkField links_;
  std::vector<EdgeQueue> queues_;
  std::vector<double> powers_;
  std::vector<UserRuntime> users_;
  std::vector<Point> positions_;
  RateTable rates_;
  ScheduleDecision last_decision_;
  MetricsReport report_;
  long slot_ = 0;
};

inline MetricsReport run(const SimConfig& cfg) { return Simulator(cfg).run(); }

}  // namespace mhs
