#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mhs/video.hpp"

namespace mhs {

/// alpha-fair utility: log(x) for alpha = 1, x^(1-alpha)/(1-alpha) otherwise.
inline double alpha_fair_utility(double x, double alpha) {
  if (alpha == 1.0) return std::log(x);
  return std::pow(x, 1.0 - alpha) / (1.0 - alpha);
}

struct DppParams {
  double v = 1.0;      // penalty weight V
  double alpha = 1.0;  // fairness exponent
  /// Bits per queue unit in the quality objective Q*S - Theta*D.
  double queue_unit_bits = 1.0;

  void validate() const {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("policy: V must be positive");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("policy: alpha must be >= 0");
    if (!(queue_unit_bits > 0.0)) throw std::invalid_argument("policy: queue_unit_bits must be positive");
  }
};

/// A helper the user may request from and the backlog of its queue toward the user.
struct HelperQueue {
  std::size_t helper = 0;
  double backlog_bits = 0.0;
};

/// Shortest-queue helper; smallest id on ties. Empty -> user unserviceable.
inline std::optional<std::size_t> select_helper(std::span<const HelperQueue> candidates) {
  std::optional<std::size_t> best;
  double best_q = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    if (c.backlog_bits < best_q || (c.backlog_bits == best_q && best && c.helper < *best)) {
      best = c.helper;
      best_q = c.backlog_bits;
    }
  }
  return best;
}

/// Quality objective backlog * size - theta * quality, with backlog and size in queue units.
inline double quality_score(double backlog_bits, double theta, const Mode& mode, double queue_unit_bits = 1.0) {
  return (backlog_bits / queue_unit_bits) * (mode.size_bits / queue_unit_bits) - theta * mode.quality;
}

/// Mode minimizing quality_score; smallest index on ties.
inline std::size_t select_quality(double backlog_bits, double theta, std::span<const Mode> modes,
                                  double queue_unit_bits = 1.0) {
  if (modes.empty()) throw std::invalid_argument("select_quality: no modes");
  std::size_t best = 0;
  double best_score = quality_score(backlog_bits, theta, modes[0], queue_unit_bits);
  for (std::size_t m = 1; m < modes.size(); ++m) {
    const double s = quality_score(backlog_bits, theta, modes[m], queue_unit_bits);
    if (s < best_score) {
      best = m;
      best_score = s;
    }
  }
  return best;
}

/// argmax { V phi(g) - theta g : g in [d_min, d_max] } for alpha-fair phi.
inline double gamma_update(double theta, double v, double alpha, const QualityBounds& bounds) {
  if (theta <= 0.0) return bounds.d_max;
  if (alpha == 0.0) return theta <= v ? bounds.d_max : bounds.d_min;
  const double unconstrained = alpha == 1.0 ? v / theta : std::pow(v / theta, 1.0 / alpha);
  return std::clamp(unconstrained, bounds.d_min, bounds.d_max);
}

inline double virtual_queue_update(double theta, double gamma, double delivered_quality) {
  return std::max(theta + gamma - delivered_quality, 0.0);
}

struct UserControlState {
  double theta = 0.0;
  QualityBounds bounds;
};

struct ControlAction {
  std::size_t helper = 0;
  std::size_t mode = 0;
  std::vector<double> request_bits;  // per helper, nonzero only at `helper`
  double gamma = 0.0;
  double requested_quality = 0.0;
  double theta_next = 0.0;
};

/// Helper choice, quality choice, request assignment and virtual-queue update for
/// one user in one slot. `helper_count` sizes the request vector. Returns nullopt
/// (state untouched) when no candidate helper exists.
inline std::optional<ControlAction> congestion_control_step(const UserControlState& state, const DppParams& params,
                                                            std::span<const HelperQueue> candidates,
                                                            std::span<const Mode> modes, std::size_t helper_count) {
  const auto helper = select_helper(candidates);
  if (!helper) return std::nullopt;
  double backlog = 0.0;
  for (const auto& c : candidates)
    if (c.helper == *helper) backlog = c.backlog_bits;
  ControlAction a;
  a.helper = *helper;
  a.mode = select_quality(backlog, state.theta, modes, params.queue_unit_bits);
  a.request_bits.assign(helper_count, 0.0);
  a.request_bits.at(a.helper) = modes[a.mode].size_bits;
  a.requested_quality = modes[a.mode].quality;
  a.gamma = gamma_update(state.theta, params.v, params.alpha, state.bounds);
  a.theta_next = virtual_queue_update(state.theta, a.gamma, a.requested_quality);
  return a;
}

}  // namespace mhs
