#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mhs/expint.hpp"

namespace mhs {

// WINNER II A1 (indoor small cell) constants.
struct PathlossParams {
  double a;
  double b;
  double c;
  double sigma_db;
};

inline constexpr PathlossParams kA1Los{18.7, 46.8, 20.0, 3.0};   // sigma^2 = 9
inline constexpr PathlossParams kA1Nlos{36.8, 43.8, 20.0, 4.0};  // sigma^2 = 16

/// Below this distance the pathloss is held at its 3 m value.
inline constexpr double kMinModelDistance = 3.0;

inline const PathlossParams& pathloss_params(bool los) { return los ? kA1Los : kA1Nlos; }

/// Pathloss in dB, A log10(max(d,3)) + B + C log10(f0/5) + shadow.
inline double pathloss_db(double distance_m, bool los, double carrier_ghz = 5.0, double shadow_db = 0.0) {
  if (!(distance_m > 0.0)) throw std::domain_error("pathloss_db: distance must be positive");
  if (!(carrier_ghz > 0.0)) throw std::domain_error("pathloss_db: carrier frequency must be positive");
  const auto& p = pathloss_params(los);
  const double d = std::max(distance_m, kMinModelDistance);
  return p.a * std::log10(d) + p.b + p.c * std::log10(carrier_ghz / 5.0) + shadow_db;
}

inline double db_to_gain(double loss_db) { return std::pow(10.0, -loss_db / 10.0); }

/// Probability that a link of the given length is line-of-sight.
inline double los_probability(double distance_m) {
  if (!(distance_m > 0.0)) throw std::domain_error("los_probability: distance must be positive");
  if (distance_m <= 2.5) return 1.0;
  const double base = 1.24 - 0.6 * std::log10(distance_m);
  const double p = 1.0 - 0.9 * std::cbrt(1.0 - base * base * base);
  return std::clamp(p, 0.0, 1.0);
}

/// Ergodic-rate lower bound e^{1/G} E1(1/G) in nats per channel symbol.
inline double peak_rate(double sinr) {
  if (sinr < 0.0 || std::isnan(sinr)) throw std::domain_error("peak_rate: SINR must be non-negative");
  if (sinr == 0.0) return 0.0;
  return exp_scaled_e1(1.0 / sinr);
}

/// Slow-fading state of one helper-user link.
struct LinkRealization {
  bool los = true;
  double shadow_db = 0.0;
  double gain = 0.0;
};

}  // namespace mhs
