// Command-line front end: run, sweep-v, compare.
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mhs/config.hpp"
#include "mhs/engine.hpp"
#include "mhs/experiments.hpp"
#include "mhs/report.hpp"

namespace {

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  for (const auto& s : mhs::detail::split(csv, ',')) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw mhs::ConfigError("bad number '" + s + "'");
    out.push_back(v);
  }
  return out;
}

void print_summary(const std::string& label, const mhs::MetricsReport& r) {
  const auto s = mhs::summarize_policy(r);
  std::cout << label << ": slots=" << r.slots_run << " sessions=" << r.sessions.size() << " users=" << s.users
            << " mean_ssim=" << s.mean_ssim << " buffering_frac=" << s.mean_buffering_frac
            << " underrun=" << s.mean_underrun_rate << " mean_backlog=" << r.mean_total_backlog() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-helper adaptive video streaming simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", v_list = "0.1,1,10,100", policies = "dpp-macro,dpp-unique,max-sinr", seeds_csv;
  std::uint64_t seed = 0;
  bool seed_set = false;

  auto* run_cmd = app.add_subcommand("run", "simulate one configuration");
  run_cmd->add_option("--config", config_path, "config file")->required();
  run_cmd->add_option("--seed", seed, "random seed (overrides [run] seed)")->each([&](const std::string&) { seed_set = true; });
  run_cmd->add_option("--out", out_dir, "report directory");

  auto* sweep_cmd = app.add_subcommand("sweep-v", "sweep the utility weight V");
  sweep_cmd->add_option("--config", config_path, "config file")->required();
  sweep_cmd->add_option("--v", v_list, "comma-separated V values, in the config's queue units");
  sweep_cmd->add_option("--seeds", seeds_csv, "comma-separated seeds (default: config seed)");
  sweep_cmd->add_option("--out", out_dir, "report directory");

  auto* cmp_cmd = app.add_subcommand("compare", "run several policy variants on the same draw");
  cmp_cmd->add_option("--config", config_path, "config file")->required();
  cmp_cmd->add_option("--policies", policies, "comma-separated policy variants");
  cmp_cmd->add_option("--seed", seed, "random seed (overrides [run] seed)")->each([&](const std::string&) { seed_set = true; });
  cmp_cmd->add_option("--out", out_dir, "report directory");

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = mhs::load_config(config_path);
    if (seed_set) cfg.run.seed = seed;

    if (*run_cmd) {
      const auto report = mhs::run(cfg);
      mhs::emit_reports(report, out_dir);
      print_summary(mhs::to_string(cfg.policy), report);
    } else if (*sweep_cmd) {
      std::vector<std::uint64_t> seeds;
      if (seeds_csv.empty())
        seeds.push_back(cfg.run.seed);
      else
        for (double s : parse_doubles(seeds_csv)) seeds.push_back(static_cast<std::uint64_t>(s));
      const auto rows = mhs::sweep_v(cfg, parse_doubles(v_list), seeds);
      std::filesystem::create_directories(out_dir);
      mhs::write_sweep(std::filesystem::path(out_dir) / "sweep_v.csv", rows);
      for (const auto& r : rows)
        std::cout << "V=" << r.v << " seed=" << r.seed << " mean_backlog=" << r.mean_backlog << " utility=" << r.utility << "\n";
    } else if (*cmp_cmd) {
      std::vector<mhs::PolicyVariant> list;
      for (const auto& p : mhs::detail::split(policies, ',')) list.push_back(mhs::parse_policy(p));
      const auto runs = mhs::compare(cfg, list);
      mhs::emit_comparison(runs, out_dir);
      for (const auto& [p, r] : runs) print_summary(mhs::to_string(p), r);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
