#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mhs/config.hpp"
#include "mhs/engine.hpp"

namespace mhs {

struct CdfPoint {
  double value = 0.0;
  double fraction = 0.0;
};

/// Empirical CDF: one step per distinct value, fractions non-decreasing up to 1.
inline std::vector<CdfPoint> empirical_cdf(std::vector<double> samples) {
  std::vector<CdfPoint> out;
  if (samples.empty()) return out;
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i + 1 < samples.size() && samples[i + 1] == samples[i]) continue;
    out.push_back({samples[i], static_cast<double>(i + 1) / n});
  }
  return out;
}

/// Named sample sets behind the cdf_<metric>.csv files. Per-user metrics pool all
/// sessions of a user; pre-buffering time is per session.
inline std::vector<std::pair<std::string, std::vector<double>>> cdf_samples(const MetricsReport& report) {
  std::vector<double> ssim, skipped, rebuf, buffering, underrun, prebuffer;
  for (const auto& u : summarize_users(report)) {
    ssim.push_back(u.mean_ssim);
    skipped.push_back(u.skipped_pct);
    rebuf.push_back(u.rebuf_frac);
    buffering.push_back(u.buffering_frac);
    underrun.push_back(u.underrun_rate);
  }
  for (const auto& s : report.sessions) prebuffer.push_back(static_cast<double>(s.metrics.prebuffer_slots));
  return {{"ssim", ssim},           {"skipped", skipped},     {"rebuffer", rebuf},
          {"buffering", buffering}, {"underrun", underrun},   {"prebuffer", prebuffer}};
}

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

}  // namespace detail

/// Writes a multi-column backlog series: slot, then one column per run.
inline void write_timeseries(const std::filesystem::path& path,
                             const std::vector<std::pair<std::string, const MetricsReport*>>& runs) {
  auto f = detail::open_out(path);
  f << "slot";
  std::size_t rows = 0;
  for (const auto& [name, r] : runs) {
    f << "," << (runs.size() == 1 ? std::string("total_backlog") : "total_backlog_" + name);
    rows = std::max(rows, r->total_backlog.size());
  }
  f << "\n";
  for (std::size_t t = 0; t < rows; ++t) {
    f << t;
    for (const auto& [name, r] : runs) {
      f << ",";
      if (t < r->total_backlog.size()) f << detail::fmt(r->total_backlog[t]);
    }
    f << "\n";
  }
}

/// Writes sessions.csv, users.csv, cdf_<metric>.csv, timeseries.csv,
/// helper_trace.csv and, when a user was traced, trace.csv into `out_dir`.
inline void emit_reports(const MetricsReport& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) throw std::runtime_error("cannot create " + out_dir.string());

  {
    auto f = detail::open_out(out_dir / "sessions.csv");
    f << "user,session,start_slot,T_u,skipped_pct,mean_ssim,rebuf_frac,underrun_rate,complete\n";
    for (const auto& s : report.sessions) {
      const auto& m = s.metrics;
      f << s.user << "," << s.serial << "," << s.start_slot << "," << m.prebuffer_slots << "," << detail::fmt(m.skipped_pct)
        << "," << detail::fmt(m.mean_ssim) << "," << detail::fmt(m.rebuf_frac) << "," << detail::fmt(m.underrun_rate) << ","
        << (m.complete ? 1 : 0) << "\n";
    }
  }
  {
    auto f = detail::open_out(out_dir / "users.csv");
    f << "user,sessions,skipped_pct,mean_ssim,rebuf_frac,buffering_frac,underrun_rate,stalls\n";
    for (const auto& u : summarize_users(report)) {
      f << u.user << "," << u.sessions << "," << detail::fmt(u.skipped_pct) << "," << detail::fmt(u.mean_ssim) << ","
        << detail::fmt(u.rebuf_frac) << "," << detail::fmt(u.buffering_frac) << "," << detail::fmt(u.underrun_rate) << ","
        << u.stalls << "\n";
    }
  }
  for (const auto& [name, samples] : cdf_samples(report)) {
    auto f = detail::open_out(out_dir / ("cdf_" + name + ".csv"));
    f << "value,cumulative_fraction\n";
    for (const auto& p : empirical_cdf(samples)) f << detail::fmt(p.value) << "," << detail::fmt(p.fraction) << "\n";
  }
  write_timeseries(out_dir / "timeseries.csv", {{to_string(report.policy), &report}});
  {
    auto f = detail::open_out(out_dir / "helper_trace.csv");
    f << "user,session,chunk,helper,slot\n";
    for (const auto& r : report.helper_trace)
      f << *report.helper_trace_user << "," << r.session << "," << r.chunk << "," << r.helper << "," << r.slot << "\n";
  }
  if (!report.trace.empty()) {
    auto f = detail::open_out(out_dir / "trace.csv");
    f << "slot,session,event,chunk\n";
    for (const auto& r : report.trace) f << r.slot << "," << r.session << "," << to_string(r.event.kind) << "," << r.event.chunk << "\n";
  }
}

}  // namespace mhs
