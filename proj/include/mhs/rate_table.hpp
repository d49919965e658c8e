#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "mhs/channel.hpp"
#include "mhs/matrix.hpp"
#include "mhs/rng.hpp"
#include "mhs/topology.hpp"

namespace mhs {

/// Displacement that triggers a fresh (LOS, shadowing) draw for a link.
inline constexpr double kRedrawDistance = 1.0;

/// Per-link slow-fading state for every helper-user pair. LOS and shadowing are
/// redrawn only after the user has moved kRedrawDistance since the last draw;
/// the gain tracks the current distance every slot.
class LinkField {
 public:
  LinkField() = default;
  LinkField(std::size_t helpers, std::size_t users, double carrier_ghz = 5.0)
      : links_(helpers, users), anchors_(helpers, users), drawn_(helpers, users, 0), carrier_ghz_(carrier_ghz) {}

  std::size_t helpers() const { return links_.rows(); }
  std::size_t users() const { return links_.cols(); }
  const Matrix<LinkRealization>& links() const { return links_; }
  const LinkRealization& at(std::size_t h, std::size_t u) const { return links_(h, u); }

  /// Number of (LOS, shadow) draws performed so far.
  std::size_t draw_count() const { return draws_; }

  void resample(Rng& rng, const Topology& topo, const std::vector<Point>& positions) {
    for (std::size_t u = 0; u < users(); ++u) {
      for (std::size_t h = 0; h < helpers(); ++h) {
        const double d = distance(topo.helpers[h], positions[u]);
        const double d_eff = d > 0.0 ? d : 1e-3;
        auto& link = links_(h, u);
        if (!drawn_(h, u) || distance(anchors_(h, u), positions[u]) >= kRedrawDistance) {
          std::uniform_real_distribution<double> uni(0.0, 1.0);
          link.los = uni(rng) < los_probability(d_eff);
          std::normal_distribution<double> shadow(0.0, pathloss_params(link.los).sigma_db);
          link.shadow_db = shadow(rng);
          anchors_(h, u) = positions[u];
          drawn_(h, u) = 1;
          ++draws_;
        }
        link.gain = db_to_gain(pathloss_db(d_eff, link.los, carrier_ghz_, link.shadow_db));
      }
    }
  }

  /// Overrides a link (tests and scripted scenarios).
  void set(std::size_t h, std::size_t u, LinkRealization link) {
    links_(h, u) = link;
    drawn_(h, u) = 1;
  }

 private:
  Matrix<LinkRealization> links_;
  Matrix<Point> anchors_;
  Matrix<unsigned char> drawn_;
  double carrier_ghz_ = 5.0;
  std::size_t draws_ = 0;
};

inline LinkField resample_link_state(Rng& rng, const Topology& topo, const std::vector<Point>& positions,
                                     LinkField field) {
  field.resample(rng, topo, positions);
  return field;
}

struct RateParams {
  double symbols_per_slot = 1e5 * 84;  // n
  double edge_threshold_bits = 1e6;
};

struct RateTable {
  Matrix<double> gamma;      // SINR, linear
  Matrix<double> peak_rate;  // C_hu, per channel symbol
  Matrix<unsigned char> edges;
  double symbols_per_slot = 0.0;

  std::size_t helpers() const { return gamma.rows(); }
  std::size_t users() const { return gamma.cols(); }
  bool is_edge(std::size_t h, std::size_t u) const { return edges(h, u) != 0; }
  /// Bits a helper can push to a user in one slot at full peak rate.
  double slot_bits(std::size_t h, std::size_t u) const { return symbols_per_slot * peak_rate(h, u); }

  std::vector<std::size_t> neighbors_of_user(std::size_t u) const {
    std::vector<std::size_t> out;
    for (std::size_t h = 0; h < helpers(); ++h)
      if (is_edge(h, u)) out.push_back(h);
    return out;
  }
};

/// SINR with unit noise and interference from every other helper, peak rates, and
/// the edge set {(h,u) : n C_hu > threshold}.
inline RateTable compute_rate_table(const Matrix<double>& gains, const std::vector<double>& powers,
                                    const RateParams& params) {
  const std::size_t H = gains.rows();
  const std::size_t U = gains.cols();
  RateTable table{Matrix<double>(H, U), Matrix<double>(H, U), Matrix<unsigned char>(H, U, 0), params.symbols_per_slot};
  for (std::size_t u = 0; u < U; ++u) {
    for (std::size_t h = 0; h < H; ++h) {
      double interference = 0.0;
      for (std::size_t other = 0; other < H; ++other)
        if (other != h) interference += powers[other] * gains(other, u);
      const double sinr = powers[h] * gains(h, u) / (1.0 + interference);
      table.gamma(h, u) = sinr;
      table.peak_rate(h, u) = peak_rate(sinr);
      table.edges(h, u) = params.symbols_per_slot * table.peak_rate(h, u) > params.edge_threshold_bits ? 1 : 0;
    }
  }
  return table;
}

inline RateTable compute_rate_table(const LinkField& field, const std::vector<double>& powers,
                                    const RateParams& params) {
  Matrix<double> gains(field.helpers(), field.users());
  for (std::size_t h = 0; h < field.helpers(); ++h)
    for (std::size_t u = 0; u < field.users(); ++u) gains(h, u) = field.at(h, u).gain;
  return compute_rate_table(gains, powers, params);
}

}  // namespace mhs
