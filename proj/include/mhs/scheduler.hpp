#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <optional>
#include <vector>

#include "mhs/matching.hpp"
#include "mhs/matrix.hpp"

namespace mhs {

/// Per-slot transmission decision. Every helper serves at most one user, at that
/// link's full peak rate, so sum_u mu_hu / C_hu <= 1 holds for each helper.
struct ScheduleDecision {
  Matrix<double> service_bits;  // n * mu_hu
  std::vector<std::optional<std::size_t>> user_of_helper;
};

/// Inputs shared by both scheduling variants: queue backlogs (bits), peak rates,
/// and the pairs a helper may serve this slot.
struct ScheduleInput {
  const Matrix<double>& backlog_bits;
  const Matrix<double>& peak_rate;
  const Matrix<unsigned char>& eligible;
  double symbols_per_slot = 1.0;

  double weight(std::size_t h, std::size_t u) const {
    return eligible(h, u) ? backlog_bits(h, u) * peak_rate(h, u) : 0.0;
  }
};

inline ScheduleDecision make_decision(const ScheduleInput& in, std::vector<std::optional<std::size_t>> user_of_helper) {
  ScheduleDecision d{Matrix<double>(in.backlog_bits.rows(), in.backlog_bits.cols(), 0.0), std::move(user_of_helper)};
  for (std::size_t h = 0; h < d.user_of_helper.size(); ++h) {
    if (const auto u = d.user_of_helper[h]) d.service_bits(h, *u) = in.symbols_per_slot * in.peak_rate(h, *u);
  }
  return d;
}

/// Each helper independently serves argmax_u Q_hu C_hu (smallest user id on ties);
/// a helper whose weights are all zero idles. Several helpers may serve one user.
inline ScheduleDecision schedule_macro_diversity(const ScheduleInput& in) {
  const std::size_t H = in.backlog_bits.rows();
  const std::size_t U = in.backlog_bits.cols();
  std::vector<std::optional<std::size_t>> pick(H);
  for (std::size_t h = 0; h < H; ++h) {
    double best = 0.0;
    for (std::size_t u = 0; u < U; ++u) {
      const double w = in.weight(h, u);
      if (w > best) {
        best = w;
        pick[h] = u;
      }
    }
  }
  return make_decision(in, std::move(pick));
}

/// Each user is served by at most one helper: maximum-weight matching on Q_hu C_hu.
inline ScheduleDecision schedule_unique_association(const ScheduleInput& in) {
  const std::size_t H = in.backlog_bits.rows();
  const std::size_t U = in.backlog_bits.cols();
  Matrix<double> w(H, U, 0.0);
  for (std::size_t h = 0; h < H; ++h)
    for (std::size_t u = 0; u < U; ++u) w(h, u) = in.weight(h, u);
  return make_decision(in, max_weight_bipartite_matching(w).user_of_helper);
}

struct QueueStep {
  double backlog = 0.0;
  double delivered = 0.0;
};

/// Q' = max(Q - service, 0) + arrivals; delivered = min(Q, service).
inline QueueStep queue_update(double backlog, double service, double arrivals) {
  const double delivered = std::min(backlog, service);
  return {std::max(backlog - service, 0.0) + arrivals, delivered};
}

/// A requested chunk travelling through one helper-to-user queue.
struct ChunkTicket {
  std::size_t session = 0;
  std::size_t chunk = 0;  // 1-based index within the session
  double bits = 0.0;
};

/// FIFO framing of a transmission queue: bits drain in request order and a chunk
/// completes in the slot its last bit leaves.
class EdgeQueue {
 public:
  double backlog() const { return backlog_; }
  bool empty() const { return pending_.empty(); }
  std::size_t pending_chunks() const { return pending_.size(); }

  void push(ChunkTicket t) {
    backlog_ += t.bits;
    pending_.push_back({t, t.bits});
  }

  /// Drains up to `service_bits`; returns the delivered bits and appends finished
  /// chunks to `completed`.
  double serve(double service_bits, std::vector<ChunkTicket>& completed) {
    double delivered = 0.0;
    double budget = service_bits;
    while (budget > 0.0 && !pending_.empty()) {
      auto& front = pending_.front();
      const double take = std::min(budget, front.remaining);
      front.remaining -= take;
      budget -= take;
      delivered += take;
      if (front.remaining <= 0.0) {
        completed.push_back(front.ticket);
        pending_.pop_front();
      }
    }
    backlog_ = pending_.empty() ? 0.0 : std::max(backlog_ - delivered, 0.0);
    return delivered;
  }

 private:
  struct Entry {
    ChunkTicket ticket;
    double remaining = 0.0;
  };
  std::deque<Entry> pending_;
  double backlog_ = 0.0;
};

}  // namespace mhs
