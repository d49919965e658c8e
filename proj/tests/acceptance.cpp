// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero when
// any criterion fails. Usage: mhs_acceptance [out_dir]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mhs/config.hpp"
#include "mhs/dpp.hpp"
#include "mhs/engine.hpp"
#include "mhs/experiments.hpp"
#include "mhs/expint.hpp"
#include "mhs/matching.hpp"
#include "mhs/playback.hpp"
#include "mhs/report.hpp"
#include "mhs/rng.hpp"
#include "mhs/scheduler.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

struct Outcome {
  std::string id;
  bool pass;
};

std::vector<Outcome> g_outcomes;

void report(const std::string& id, const std::string& title, const std::function<Verdict()>& check) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream line;
  line.setf(std::ios::fixed);
  line.precision(2);
  line << (v.pass ? "PASS" : "FAIL") << "  criterion " << id << "  " << title << "  [" << v.detail << "; " << secs << " s]";
  std::cout << line.str() << std::endl;
  g_outcomes.push_back({id, v.pass});
}

std::string num(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

std::vector<mhs::Mode> random_modes(mhs::Rng& rng, std::size_t n) {
  std::uniform_real_distribution<double> size(1e5, 3e6), q(0.5, 1.0);
  std::vector<double> s(n), d(n);
  for (auto& x : s) x = size(rng);
  for (auto& x : d) x = q(rng);
  std::sort(s.begin(), s.end());
  std::sort(d.begin(), d.end());
  std::vector<mhs::Mode> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({s[i], d[i]});
  return out;
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Verdict criterion_dpp_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  auto rng = mhs::make_stream(101, "acceptance-dpp");
  std::uniform_int_distribution<std::size_t> nh(1, 5), nm(1, 8), qi(0, 8);
  std::uniform_real_distribution<double> th(0.0, 60.0);
  std::size_t mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t H = nh(rng);
    const auto modes = random_modes(rng, nm(rng));
    std::vector<mhs::HelperQueue> cands;
    std::vector<std::pair<std::size_t, double>> brute;
    for (std::size_t h = 0; h < H; ++h) {
      const double q = static_cast<double>(qi(rng)) * 4e5;
      cands.push_back({h, q});
      brute.push_back({h, q});
    }
    const double theta = th(rng);
    const auto a = mhs::congestion_control_step({theta, {0.5, 1.0}}, {10.0, 1.0, 1e6}, cands, modes, H);
    const auto b = oracle::dpp_brute_force(brute, theta, modes, 1e6);
    if (!a || !b || a->helper != b->helper || a->mode != b->mode) ++mismatches;
  }
  const double secs = elapsed_since(t0);
  return {mismatches == 0 && secs < 10.0, "1000 instances, " + std::to_string(mismatches) + " mismatches, limit 10 s"};
}

double matching_value(const mhs::Matrix<double>& w, const mhs::Matching& m, bool& feasible) {
  std::set<std::size_t> users;
  double total = 0.0;
  for (std::size_t h = 0; h < m.user_of_helper.size(); ++h) {
    if (!m.user_of_helper[h]) continue;
    const auto u = *m.user_of_helper[h];
    if (u >= w.cols() || !users.insert(u).second) feasible = false;
    else total += w(h, u);
  }
  if (m.user_of_helper.size() != w.rows()) feasible = false;
  return total;
}

Verdict criterion_matching() {
  const auto t0 = std::chrono::steady_clock::now();
  auto rng = mhs::make_stream(102, "acceptance-matching");
  std::uniform_int_distribution<std::size_t> dim(1, 6), sparse(0, 4);
  std::uniform_real_distribution<double> val(0.0, 50.0);
  std::size_t wrong = 0, infeasible = 0;
  for (int i = 0; i < 1000; ++i) {
    mhs::Matrix<double> w(dim(rng), dim(rng));
    for (auto& x : w.data()) x = sparse(rng) == 0 ? 0.0 : val(rng);
    const auto m = mhs::max_weight_bipartite_matching(w);
    bool feasible = true;
    const double got = matching_value(w, m, feasible);
    const double best = oracle::matching_brute_force(w);
    if (!feasible) ++infeasible;
    if (std::abs(got - best) > 1e-9 * std::max(1.0, best)) ++wrong;
  }
  const double secs = elapsed_since(t0);
  return {wrong == 0 && infeasible == 0 && secs < 30.0,
          "1000 instances up to 6x6, " + std::to_string(wrong) + " suboptimal, " + std::to_string(infeasible) +
              " infeasible, limit 30 s"};
}

Verdict criterion_gamma() {
  auto rng = mhs::make_stream(103, "acceptance-gamma");
  std::uniform_real_distribution<double> lg(-3.0, 3.0), lo(0.05, 0.9), width(0.01, 1.0);
  double worst = 0.0;
  for (double alpha : {0.0, 0.5, 1.0, 2.0}) {
    for (int i = 0; i < 200; ++i) {
      const double theta = std::pow(10.0, lg(rng)), v = std::pow(10.0, lg(rng));
      const double a = lo(rng), b = a + width(rng);
      const double g = mhs::gamma_update(theta, v, alpha, {a, b});
      const double got = v * oracle::alpha_fair(g, alpha) - theta * g;
      const double best = oracle::gamma_grid_best_value(theta, v, alpha, a, b, 10000);
      const double gap = (best - got) / std::max(std::abs(best), 1e-300);
      if (g < a || g > b) worst = std::numeric_limits<double>::infinity();
      worst = std::max(worst, gap);
    }
  }
  return {worst <= 1e-9, "800 draws, worst relative gap " + num(worst, 3) + ", limit 1e-9"};
}

Verdict criterion_expint() {
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double x = 1e-3 * std::pow(50.0 / 1e-3, i / 99.0);
    worst = std::max(worst, std::abs(mhs::exp_integral_e1(x) - oracle::e1_quadrature(x)));
  }
  return {worst <= 1e-10, "100 points in [1e-3, 50], worst abs error " + num(worst, 3) + ", limit 1e-10"};
}

Verdict criterion_table_replay() {
  const std::vector<long> arrivals{3, 4, 5, 11, 6, 8, 9, 10, 12, 13, 16, 15, 14};
  auto run = [&](double rho, std::vector<std::size_t>& frontier, std::vector<std::size_t>& added,
                 std::vector<std::optional<std::size_t>>& skipped) {
    mhs::PlaybackSession s(13, {rho, 25.0, 10});
    frontier = {0};
    added = {0};
    skipped = {std::nullopt};
    for (long t = 1; t <= 20; ++t) {
      if (t <= 13) s.on_request(static_cast<std::size_t>(t), t, 0.9);
      for (std::size_t k = 1; k <= 13; ++k)
        if (arrivals[k - 1] == t) s.on_chunk_delivered(k, t);
      const auto out = s.advance_slot(t);
      frontier.push_back(s.frontier());
      added.push_back(out.added);
      skipped.push_back(out.skipped);
    }
  };
  std::vector<std::size_t> f, a;
  std::vector<std::optional<std::size_t>> sk;
  run(std::numeric_limits<double>::infinity(), f, a, sk);
  bool ok = true;
  for (long t = 1; t <= 20; ++t) ok = ok && f[t] == oracle::in_order_playable(arrivals, t) && !sk[t];
  ok = ok && oracle::playable_time(arrivals, 4) == 11 && f[10] == 3 && f[11] == 8 && a[11] == 5;
  const bool first = ok;
  run(1.0, f, a, sk);
  const bool second = f[7] == 3 && f[8] == 6 && sk[8] && *sk[8] == 4 && a[8] == 2;
  return {first && second, std::string("rho=inf trajectory ") + (first ? "matches" : "differs") + ", rho=1 skip of chunk 4 at t=8 " +
                               (second ? "matches" : "differs")};
}

Verdict criterion_tradeoff(const fs::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = mhs::load_config(std::string(MHS_CONFIG_DIR) + "/sweep.conf");
  const std::vector<double> vs{0.1, 1.0, 10.0, 100.0};
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  const auto rows = mhs::sweep_v(cfg, vs, seeds);
  mhs::write_sweep(out / "sweep_v.csv", rows);
  std::vector<double> mean_b(vs.size(), 0.0), mean_u(vs.size(), 0.0);
  bool per_seed = true;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const auto& r = rows[s * vs.size() + i];
      mean_b[i] += r.mean_backlog / static_cast<double>(seeds.size());
      mean_u[i] += r.utility / static_cast<double>(seeds.size());
      if (i > 0 && r.mean_backlog < 0.95 * rows[s * vs.size() + i - 1].mean_backlog) per_seed = false;
    }
  }
  bool increasing = true;
  for (std::size_t i = 1; i < vs.size(); ++i) increasing = increasing && mean_b[i] > mean_b[i - 1];
  const std::size_t top = vs.size() - 1;
  const bool utility_ok = mean_u[top] >= mean_u[top - 1] - 0.01 * std::abs(mean_u[top - 1]);
  const double secs = elapsed_since(t0);
  std::string d = "backlog";
  for (double b : mean_b) d += " " + num(b);
  d += ", utility";
  for (double u : mean_u) d += " " + num(u);
  d += ", limit 120 s";
  return {increasing && per_seed && utility_ok && secs < 120.0, d};
}

struct Exp2Runs {
  std::vector<mhs::PolicySummary> macro, unique, baseline;
  std::vector<mhs::UserSummary> macro_users, unique_users;
  double seconds = 0.0;
};

const Exp2Runs& exp2_runs(const fs::path& out) {
  static Exp2Runs runs = [&] {
    const auto t0 = std::chrono::steady_clock::now();
    Exp2Runs r;
    auto cfg = mhs::load_config(std::string(MHS_CONFIG_DIR) + "/exp2.conf");
    for (std::uint64_t seed : {1, 2, 3}) {
      cfg.run.seed = seed;
      const auto results =
          mhs::compare(cfg, {mhs::PolicyVariant::dpp_macro, mhs::PolicyVariant::dpp_unique, mhs::PolicyVariant::max_sinr});
      mhs::emit_comparison(results, out / "exp2" / ("seed" + std::to_string(seed)));
      r.macro.push_back(mhs::summarize_policy(results[0].second));
      r.unique.push_back(mhs::summarize_policy(results[1].second));
      r.baseline.push_back(mhs::summarize_policy(results[2].second));
      for (const auto& u : mhs::summarize_users(results[0].second)) r.macro_users.push_back(u);
      for (const auto& u : mhs::summarize_users(results[1].second)) r.unique_users.push_back(u);
    }
    r.seconds = elapsed_since(t0);
    return r;
  }();
  return runs;
}

double avg(const std::vector<mhs::PolicySummary>& v, double mhs::PolicySummary::*field) {
  double s = 0.0;
  for (const auto& x : v) s += x.*field;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

Verdict criterion_exp2(const fs::path& out) {
  const auto& r = exp2_runs(out);
  const double sm = avg(r.macro, &mhs::PolicySummary::mean_ssim), su = avg(r.unique, &mhs::PolicySummary::mean_ssim),
               sb = avg(r.baseline, &mhs::PolicySummary::mean_ssim);
  const double bm = avg(r.macro, &mhs::PolicySummary::mean_buffering_frac),
               bu = avg(r.unique, &mhs::PolicySummary::mean_buffering_frac),
               bb = avg(r.baseline, &mhs::PolicySummary::mean_buffering_frac);
  const bool ssim_ok = sm - sb >= 0.02 && su - sb >= 0.02;
  const bool buffering_ok = bm < bb && bu < bb;
  const bool variants_close = std::abs(sm - su) <= 0.02;
  return {ssim_ok && buffering_ok && variants_close && r.seconds < 300.0,
          "ssim macro/unique/max-sinr " + num(sm) + "/" + num(su) + "/" + num(sb) + ", buffering " + num(bm) + "/" + num(bu) +
              "/" + num(bb) + ", limit 300 s"};
}

Verdict criterion_smooth(const fs::path& out) {
  const auto& r = exp2_runs(out);
  auto fraction = [](const std::vector<mhs::UserSummary>& users) {
    std::size_t smooth = 0;
    for (const auto& u : users) smooth += u.underrun_rate <= 0.05;
    return users.empty() ? 0.0 : static_cast<double>(smooth) / static_cast<double>(users.size());
  };
  const double fm = fraction(r.macro_users), fu = fraction(r.unique_users);
  return {fm >= 0.9 && fu >= 0.9,
          "users with underrun <= 5%: macro " + num(fm, 3) + ", unique " + num(fu, 3) + " over 3 seeds, need 0.9"};
}

Verdict criterion_invariants() {
  std::vector<std::string> failed;
  auto rng = mhs::make_stream(109, "acceptance-invariants");

  {  // queue non-negativity and conservation
    std::uniform_real_distribution<double> v(0.0, 5e6);
    double q = 0.0;
    bool ok = true;
    for (int t = 0; t < 10000; ++t) {
      const double s = v(rng), a = v(rng);
      const auto r = mhs::queue_update(q, s, a);
      ok = ok && r.backlog >= 0.0 && std::abs((r.backlog - q) - (a - r.delivered)) <= 1e-6;
      q = r.backlog;
    }
    if (!ok) failed.push_back("queue");
  }
  {  // argmin and argmax scale invariance
    std::uniform_real_distribution<double> v(0.0, 10.0), c(0.1, 10.0);
    bool ok = true;
    for (int i = 0; i < 500; ++i) {
      const auto modes = random_modes(rng, 6);
      const double Q = v(rng) * 1e6, T = v(rng), k = c(rng);
      ok = ok && mhs::select_quality(Q, T, modes, 1e6) == mhs::select_quality(Q * k, T * k, modes, 1e6);
      std::vector<mhs::HelperQueue> a, b;
      for (std::size_t h = 0; h < 4; ++h) {
        const double x = std::floor(v(rng));
        a.push_back({h, x});
        b.push_back({h, x * k});
      }
      ok = ok && mhs::select_helper(a) == mhs::select_helper(b);
      mhs::Matrix<double> bq(3, 4), bq2(3, 4), cr(3, 4);
      mhs::Matrix<unsigned char> e(3, 4, 1);
      for (std::size_t j = 0; j < bq.data().size(); ++j) {
        bq.data()[j] = v(rng);
        bq2.data()[j] = bq.data()[j] * 4.0;
        cr.data()[j] = v(rng);
      }
      const mhs::ScheduleInput i1{bq, cr, e, 1.0}, i2{bq2, cr, e, 1.0};
      ok = ok && mhs::schedule_macro_diversity(i1).user_of_helper == mhs::schedule_macro_diversity(i2).user_of_helper;
      ok = ok && mhs::schedule_unique_association(i1).user_of_helper == mhs::schedule_unique_association(i2).user_of_helper;
    }
    if (!ok) failed.push_back("scale");
  }
  {  // playback: one skip per slot, non-negative buffer, monotone frontier, accounting
    std::uniform_int_distribution<long> jitter(0, 30);
    std::uniform_int_distribution<int> rho(1, 8);
    bool ok = true;
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t L = 100;
      std::vector<long> arrivals(L);
      for (std::size_t k = 0; k < L; ++k) arrivals[k] = static_cast<long>(k + 1) + jitter(rng);
      mhs::PlaybackSession s(L, {static_cast<double>(rho(rng)), 3.0, 10});
      std::size_t pf = 0, ps = 0;
      for (long t = 1; t <= 300; ++t) {
        if (t <= static_cast<long>(L)) s.on_request(static_cast<std::size_t>(t), t, 0.8);
        for (std::size_t k = 1; k <= L; ++k)
          if (arrivals[k - 1] == t) s.on_chunk_delivered(k, t);
        s.advance_slot(t);
        ok = ok && s.buffer_level() >= 0 && s.frontier() >= pf && s.skipped_count() <= ps + 1 &&
             s.frontier() - s.skipped_count() == s.played() + static_cast<std::size_t>(s.buffer_level());
        pf = s.frontier();
        ps = s.skipped_count();
      }
    }
    if (!ok) failed.push_back("playback");
  }
  {  // determinism and bit conservation in the engine
    auto cfg = mhs::load_config(std::string(MHS_CONFIG_DIR) + "/exp1_scaled.conf");
    cfg.run.horizon = 400;
    const auto a = mhs::run(cfg), b = mhs::run(cfg);
    if (a.total_backlog != b.total_backlog || a.helper_trace.size() != b.helper_trace.size() ||
        a.sessions.size() != b.sessions.size())
      failed.push_back("determinism");
    if (a.max_conservation_error > 1e-9 || a.duplicate_deliveries != 0) failed.push_back("conservation");
  }
  std::string d = "queue, scale invariance, playback, determinism, conservation";
  if (!failed.empty()) {
    d = "failed:";
    for (const auto& f : failed) d += " " + f;
  }
  return {failed.empty(), d};
}

Verdict experiment1(const fs::path& out) {
  const auto cfg = mhs::load_config(std::string(MHS_CONFIG_DIR) + "/exp1_scaled.conf");
  const auto r = mhs::run(cfg);
  const auto dir = out / "exp1_scaled";
  mhs::emit_reports(r, dir);
  bool files = true;
  for (const char* f : {"sessions.csv", "users.csv", "timeseries.csv", "helper_trace.csv", "cdf_ssim.csv", "cdf_skipped.csv",
                        "cdf_rebuffer.csv", "cdf_buffering.csv", "cdf_underrun.csv", "cdf_prebuffer.csv"})
    files = files && fs::exists(dir / f);
  std::set<std::size_t> helpers;
  for (const auto& h : r.helper_trace) helpers.insert(h.helper);
  return {files && helpers.size() >= 3 && r.slots_run == 1500,
          std::to_string(r.helpers) + " helpers, " + std::to_string(r.users) + " users, " + std::to_string(r.slots_run) +
              " slots, " + std::to_string(r.sessions.size()) + " sessions, mobile user served by " +
              std::to_string(helpers.size()) + " helpers"};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  fs::create_directories(out);

  report("1", "congestion control equals brute-force DPP minimiser", criterion_dpp_oracle);
  report("2", "matching equals exhaustive optimum", criterion_matching);
  report("3", "gamma closed form attains grid maximum", criterion_gamma);
  report("4", "E1 accuracy against quadrature", criterion_expint);
  report("5", "worked arrival trace replay", criterion_table_replay);
  report("6", "backlog/utility tradeoff in V", [&] { return criterion_tradeoff(out); });
  report("7", "clustered network: DPP beats max-SINR", [&] { return criterion_exp2(out); });
  report("8", "smooth streaming for 90% of users", [&] { return criterion_smooth(out); });
  report("9", "invariant property suites", criterion_invariants);
  report("E1", "scaled large-network run and reports", [&] { return experiment1(out); });

  std::size_t failed = 0;
  for (const auto& o : g_outcomes) failed += !o.pass;
  std::cout << (g_outcomes.size() - failed) << "/" << g_outcomes.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
