#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "mhs/config.hpp"
#include "mhs/engine.hpp"
#include "mhs/report.hpp"

namespace mhs {

struct SweepRow {
  double v = 0.0;
  std::uint64_t seed = 0;
  double mean_backlog = 0.0;  // time average of sum Q (queue units) + sum Theta
  double utility = 0.0;       // sum_u phi(mean requested quality)
};

/// Runs `cfg` once per (V, seed); every run of a seed shares the same environment.
inline std::vector<SweepRow> sweep_v(const SimConfig& cfg, const std::vector<double>& v_list,
                                     const std::vector<std::uint64_t>& seeds) {
  std::vector<SweepRow> rows;
  for (const auto seed : seeds) {
    for (const double v : v_list) {
      SimConfig c = cfg;
      c.dpp.v = v;
      c.run.seed = seed;
      const auto r = run(c);
      rows.push_back({v, seed, r.mean_total_backlog(), r.network_utility()});
    }
  }
  return rows;
}

inline std::vector<SweepRow> sweep_v(const SimConfig& cfg, const std::vector<double>& v_list) {
  return sweep_v(cfg, v_list, {cfg.run.seed});
}

inline void write_sweep(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  auto f = detail::open_out(path);
  f << "v,seed,mean_total_backlog,utility\n";
  for (const auto& r : rows)
    f << detail::fmt(r.v) << "," << r.seed << "," << detail::fmt(r.mean_backlog) << "," << detail::fmt(r.utility) << "\n";
}

/// Same config and seed under each policy variant.
inline std::vector<std::pair<PolicyVariant, MetricsReport>> compare(const SimConfig& cfg,
                                                                   const std::vector<PolicyVariant>& policies) {
  std::vector<std::pair<PolicyVariant, MetricsReport>> out;
  for (const auto p : policies) {
    SimConfig c = cfg;
    c.policy = p;
    out.emplace_back(p, run(c));
  }
  return out;
}

struct PolicySummary {
  double mean_ssim = 0.0;
  double mean_buffering_frac = 0.0;
  double mean_underrun_rate = 0.0;
  double smooth_user_fraction = 0.0;  // users with underrun rate <= 5%
  std::size_t users = 0;
};

inline PolicySummary summarize_policy(const MetricsReport& r) {
  PolicySummary s;
  const auto users = summarize_users(r);
  for (const auto& u : users) {
    s.mean_ssim += u.mean_ssim;
    s.mean_buffering_frac += u.buffering_frac;
    s.mean_underrun_rate += u.underrun_rate;
    if (u.underrun_rate <= 0.05) s.smooth_user_fraction += 1.0;
  }
  s.users = users.size();
  if (s.users) {
    const double n = static_cast<double>(s.users);
    s.mean_ssim /= n;
    s.mean_buffering_frac /= n;
    s.mean_underrun_rate /= n;
    s.smooth_user_fraction /= n;
  }
  return s;
}

/// Writes one sub-directory of reports per policy, a combined timeseries.csv and
/// summary.csv.
inline void emit_comparison(const std::vector<std::pair<PolicyVariant, MetricsReport>>& runs,
                            const std::filesystem::path& out_dir) {
  std::vector<std::pair<std::string, const MetricsReport*>> series;
  for (const auto& [p, r] : runs) {
    emit_reports(r, out_dir / to_string(p));
    series.emplace_back(to_string(p), &r);
  }
  write_timeseries(out_dir / "timeseries.csv", series);
  auto f = detail::open_out(out_dir / "summary.csv");
  f << "policy,users,mean_ssim,mean_buffering_frac,mean_underrun_rate,smooth_user_fraction\n";
  for (const auto& [p, r] : runs) {
    const auto s = summarize_policy(r);
    f << to_string(p) << "," << s.users << "," << detail::fmt(s.mean_ssim) << "," << detail::fmt(s.mean_buffering_frac) << ","
      << detail::fmt(s.mean_underrun_rate) << "," << detail::fmt(s.smooth_user_fraction) << "\n";
  }
}

}  // namespace mhs
