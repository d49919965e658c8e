#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace mhs {

/// Sliding-window maximum of chunk delays W_k = A_k - t_k over
/// t - delta + 1 <= A_k <= t.
class DelayEstimator {
 public:
  explicit DelayEstimator(long delta = 10) : delta_(delta) {
    if (delta < 1) throw std::invalid_argument("delay window must be >= 1 slot");
  }

  long delta() const { return delta_; }

  void add(long arrival, long delay) {
    while (!records_.empty() && records_.front().arrival < arrival - delta_ + 1) records_.pop_front();
    records_.push_back({arrival, delay});
  }

  /// E_t; zero when no delivery falls in the window.
  long max_in_window(long t) const {
    long best = 0;
    for (const auto& r : records_) {
      if (r.arrival >= t - delta_ + 1 && r.arrival <= t) best = std::max(best, r.delay);
    }
    return best;
  }

 private:
  struct Record {
    long arrival;
    long delay;
  };
  long delta_;
  std::deque<Record> records_;
};

inline long delay_window_max(const DelayEstimator& estimator, long t) { return estimator.max_in_window(t); }

struct PlaybackParams {
  double rho = std::numeric_limits<double>::infinity();  // skip threshold
  double xi = 25.0;                                      // start multiplier
  long delta = 10;                                       // delay window (slots)

  void validate() const {
    if (!(rho > 0.0)) throw std::invalid_argument("playback: rho must be > 0");
    if (!(xi > 0.0) || !std::isfinite(xi)) throw std::invalid_argument("playback: xi must be > 0");
    if (delta < 1) throw std::invalid_argument("playback: delta must be >= 1");
  }
};

enum class PlaybackMode { prebuffering, playing, rebuffering, done };

enum class PlaybackEventKind { request, delivered, duplicate, playable, skip, start, stall, done };

inline std::string_view to_string(PlaybackEventKind k) {
  switch (k) {
    case PlaybackEventKind::request: return "request";
    case PlaybackEventKind::delivered: return "delivered";
    case PlaybackEventKind::duplicate: return "duplicate";
    case PlaybackEventKind::playable: return "playable";
    case PlaybackEventKind::skip: return "skip";
    case PlaybackEventKind::start: return "start";
    case PlaybackEventKind::stall: return "stall";
    case PlaybackEventKind::done: return "done";
  }
  return "?";
}

struct PlaybackEvent {
  long slot = 0;
  PlaybackEventKind kind = PlaybackEventKind::request;
  std::size_t chunk = 0;
};

/// What happened to the buffer at the end of one slot.
struct SlotOutcome {
  std::size_t added = 0;  // Lambda_t
  std::optional<std::size_t> skipped;
  bool consumed = false;
  bool started = false;
  bool stalled = false;
  bool finished = false;
};

struct SessionMetrics {
  long prebuffer_slots = 0;  // T_u of the first start
  double skipped_pct = 0.0;
  double mean_ssim = 0.0;
  double rebuf_frac = 0.0;      // rebuffering slots / slots after the first start
  double buffering_frac = 0.0;  // (pre + re)buffering slots / session slots
  std::size_t stalls = 0;
  double underrun_rate = 0.0;
  std::size_t resolved = 0;  // chunks up to the frontier
  std::size_t on_time = 0;
  std::size_t late = 0;
  std::size_t skipped = 0;
  bool complete = false;
  // raw slot counts, for pooling across sessions
  long prebuffer_slots_spent = 0;
  long rebuffer_slots = 0;
  long playback_slots = 0;  // slots after the first start
  long session_slots = 0;
};

/// Playback state of one streaming session of `length` chunks, numbered 1..length,
/// in session-local slots starting at 1.
///
/// Chunks become playable in order; an out-of-order backlog larger than rho makes
/// the player skip the missing chunk (at most one skip per slot). Playback starts,
/// and restarts after a stall, once the buffer holds at least xi * E_t chunks and
/// at least one chunk; consumption starts the slot after.
class PlaybackSession {
 public:
  PlaybackSession(std::size_t length, PlaybackParams params, bool record_events = false)
      : length_(length),
        params_(params),
        estimator_(params.delta),
        request_slot_(length + 1, -1),
        arrival_slot_(length + 1, -1),
        playable_slot_(length + 1, -1),
        quality_(length + 1, 0.0),
        is_skipped_(length + 1, 0),
        record_events_(record_events) {
    if (length == 0) throw std::invalid_argument("playback: session needs at least one chunk");
    params_.validate();
  }

  void on_request(std::size_t k, long t, double quality) {
    check_chunk(k);
    request_slot_[k] = t;
    quality_[k] = quality;
    log(t, PlaybackEventKind::request, k);
  }

  /// Records A_k = t. Returns false (and counts it) for a repeated delivery.
  bool on_chunk_delivered(std::size_t k, long t) {
    check_chunk(k);
    if (arrival_slot_[k] >= 0) {
      ++duplicates_;
      log(t, PlaybackEventKind::duplicate, k);
      return false;
    }
    arrival_slot_[k] = t;
    const long requested = request_slot_[k] >= 0 ? request_slot_[k] : static_cast<long>(k);
    estimator_.add(t, std::max(0L, t - requested));
    if (k > frontier_) pending_.insert(k);
    ++delivered_;
    log(t, PlaybackEventKind::delivered, k);
    return true;
  }

  bool start_condition(long t) const {
    const double target = params_.xi * static_cast<double>(estimator_.max_in_window(t));
    return buffer_ >= 1 && static_cast<double>(buffer_) >= target;
  }

  SlotOutcome advance_slot(long t) {
    if (t <= last_slot_) throw std::invalid_argument("playback: slots must strictly increase");
    last_slot_ = t;
    SlotOutcome out;
    if (mode_ == PlaybackMode::done) return out;

    if (!pending_.empty()) {
      const std::size_t next = *pending_.begin();
      if (next == frontier_ + 1) {
        out.added = absorb_run(t);
      } else if (static_cast<double>(pending_.size()) > params_.rho) {
        out.skipped = skip_next(t);
        if (next == frontier_ + 1) out.added = absorb_run(t);
      }
    }

    switch (mode_) {
      case PlaybackMode::prebuffering:
      case PlaybackMode::rebuffering:
        (mode_ == PlaybackMode::prebuffering ? prebuffer_slots_ : rebuffer_slots_) += 1;
        buffer_ += out.added;
        if (buffer_ >= 1 && (start_condition(t) || all_resolved())) {
          if (!first_start_) first_start_ = t;
          mode_ = PlaybackMode::playing;
          out.started = true;
          log(t, PlaybackEventKind::start, frontier_);
        } else if (buffer_ == 0 && all_resolved()) {
          finish(t, out);
        }
        break;
      case PlaybackMode::playing:
        --buffer_;
        ++played_;
        out.consumed = true;
        buffer_ += out.added;
        if (buffer_ == 0) {
          if (all_resolved()) {
            finish(t, out);
          } else {
            mode_ = PlaybackMode::rebuffering;
            ++stalls_;
            out.stalled = true;
            log(t, PlaybackEventKind::stall, frontier_);
          }
        }
        break;
      case PlaybackMode::done:
        break;
    }
    return out;
  }

  SessionMetrics metrics() const {
    SessionMetrics m;
    m.prebuffer_slots = first_start_ ? *first_start_ : prebuffer_slots_;
    m.stalls = stalls_;
    m.complete = mode_ == PlaybackMode::done;
    m.resolved = frontier_;
    double ssim_sum = 0.0;
    std::size_t ssim_n = 0;
    for (std::size_t k = 1; k <= frontier_; ++k) {
      if (is_skipped_[k]) {
        ++m.skipped;
        continue;
      }
      ssim_sum += quality_[k];
      ++ssim_n;
      if (first_start_ && playable_slot_[k] <= static_cast<long>(k) + *first_start_)
        ++m.on_time;
      else
        ++m.late;
    }
    const double denom = m.complete ? static_cast<double>(length_) : static_cast<double>(std::max<std::size_t>(frontier_, 1));
    m.skipped_pct = 100.0 * static_cast<double>(m.skipped) / denom;
    m.mean_ssim = ssim_n ? ssim_sum / static_cast<double>(ssim_n) : 0.0;
    m.underrun_rate = frontier_ ? static_cast<double>(m.skipped + m.late) / static_cast<double>(frontier_) : 0.0;
    const long elapsed = m.complete ? *done_slot_ : std::max(last_slot_, 0L);
    m.prebuffer_slots_spent = prebuffer_slots_;
    m.rebuffer_slots = rebuffer_slots_;
    m.session_slots = elapsed;
    if (first_start_ && elapsed > *first_start_) {
      m.playback_slots = elapsed - *first_start_;
      m.rebuf_frac = static_cast<double>(rebuffer_slots_) / static_cast<double>(m.playback_slots);
    }
    if (elapsed > 0)
      m.buffering_frac = static_cast<double>(prebuffer_slots_ + rebuffer_slots_) / static_cast<double>(elapsed);
    return m;
  }

  std::size_t length() const { return length_; }
  PlaybackMode mode() const { return mode_; }
  std::size_t frontier() const { return frontier_; }
  long buffer_level() const { return buffer_; }
  std::size_t played() const { return played_; }
  std::size_t delivered() const { return delivered_; }
  std::size_t skipped_count() const { return skipped_total_; }
  std::size_t duplicates() const { return duplicates_; }
  std::size_t stalls() const { return stalls_; }
  bool is_skipped(std::size_t k) const { return is_skipped_.at(k) != 0; }
  std::optional<long> start_slot() const { return first_start_; }
  std::optional<long> done_slot() const { return done_slot_; }
  long playable_slot(std::size_t k) const { return playable_slot_.at(k); }
  long arrival_slot(std::size_t k) const { return arrival_slot_.at(k); }
  long prebuffer_slots() const { return prebuffer_slots_; }
  long rebuffer_slots() const { return rebuffer_slots_; }
  /// Delivered chunks beyond the frontier, waiting for a gap to fill.
  std::size_t out_of_order() const { return pending_.size(); }
  const DelayEstimator& estimator() const { return estimator_; }
  const std::vector<PlaybackEvent>& events() const { return events_; }
  bool all_resolved() const { return frontier_ == length_; }

 private:
  void check_chunk(std::size_t k) const {
    if (k == 0 || k > length_) throw std::out_of_range("playback: chunk index out of range");
  }

  void log(long t, PlaybackEventKind kind, std::size_t chunk) {
    if (record_events_) events_.push_back({t, kind, chunk});
  }

  std::size_t absorb_run(long t) {
    std::size_t added = 0;
    while (!pending_.empty() && *pending_.begin() == frontier_ + 1) {
      ++frontier_;
      pending_.erase(pending_.begin());
      playable_slot_[frontier_] = t;
      ++added;
      log(t, PlaybackEventKind::playable, frontier_);
    }
    return added;
  }

  std::size_t skip_next(long t) {
    ++frontier_;
    is_skipped_[frontier_] = 1;
    ++skipped_total_;
    log(t, PlaybackEventKind::skip, frontier_);
    return frontier_;
  }

  void finish(long t, SlotOutcome& out) {
    mode_ = PlaybackMode::done;
    done_slot_ = t;
    out.finished = true;
    log(t, PlaybackEventKind::done, frontier_);
  }

  std::size_t length_;
  PlaybackParams params_;
  DelayEstimator estimator_;
  std::vector<long> request_slot_;
  std::vector<long> arrival_slot_;
  std::vector<long> playable_slot_;
  std::vector<double> quality_;
  std::vector<unsigned char> is_skipped_;
  std::set<std::size_t> pending_;
  std::size_t frontier_ = 0;
  long buffer_ = 0;
  std::size_t played_ = 0;
  std::size_t delivered_ = 0;
  std::size_t skipped_total_ = 0;
  std::size_t duplicates_ = 0;
  std::size_t stalls_ = 0;
  long prebuffer_slots_ = 0;
  long rebuffer_slots_ = 0;
  long last_slot_ = 0;
  PlaybackMode mode_ = PlaybackMode::prebuffering;
  std::optional<long> first_start_;
  std::optional<long> done_slot_;
  bool record_events_ = false;
  std::vector<PlaybackEvent> events_;
};

/// Start test on the session's current buffer and delay window.
inline bool start_rule(const PlaybackSession& s, long t) { return s.start_condition(t); }

}  // namespace mhs
