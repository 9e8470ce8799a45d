// eerelay: command-line front end for the relay-aided OFDMA allocator.
//
//   eerelay solve --seed 7 --k 2 --n 4 --m 1
//   eerelay sweep --scenario radius --out r.csv
//   eerelay oracle --k 2 --n 2 --m 1 --seeds 20
//   eerelay convergence --seed 3
//   eerelay scenarios
//
// Exit status: 0 on success, 1 on usage or validation errors, 2 when
// `solve --strict` does not converge.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "eerelay/config.hpp"
#include "eerelay/experiments.hpp"
#include "eerelay/oracle.hpp"
#include "eerelay/solver.hpp"

using namespace eerelay;
using nlohmann::json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<int> k, n, m;
  std::optional<double> p_max_dbm, radius_km, d_r;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config_path, "config file")->envname("EERELAY_CONFIG");
  cmd->add_option("--set", a.sets, "override, key=value (repeatable)");
  cmd->add_option("--k", a.k, "users");
  cmd->add_option("--n", a.n, "subcarriers");
  cmd->add_option("--m", a.m, "relays");
  cmd->add_option("--p-max-dbm", a.p_max_dbm, "transmit budget [dBm]");
  cmd->add_option("--radius-km", a.radius_km, "cell radius [km]");
  cmd->add_option("--d-r", a.d_r, "relay distance over cell radius");
  cmd->add_option("--seed", a.seed, "master seed");
}

std::vector<ConfigEntry> overrides_of(const CommonArgs& a) {
  std::vector<ConfigEntry> out;
  for (const auto& s : a.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    out.push_back({s.substr(0, eq), s.substr(eq + 1), 0});
  }
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  if (a.k) out.push_back({"n_users", std::to_string(*a.k), 0});
  if (a.n) out.push_back({"n_subcarriers", std::to_string(*a.n), 0});
  if (a.m) out.push_back({"n_relays", std::to_string(*a.m), 0});
  if (a.p_max_dbm) out.push_back({"p_max_dbm", num(*a.p_max_dbm), 0});
  if (a.radius_km) out.push_back({"cell_radius_km", num(*a.radius_km), 0});
  if (a.d_r) out.push_back({"d_r", num(*a.d_r), 0});
  if (a.seed) out.push_back({"master_seed", std::to_string(*a.seed), 0});
  return out;
}

std::vector<ConfigEntry> file_entries_of(const CommonArgs& a) {
  if (a.config_path.empty()) return {};
  return read_config_file(a.config_path);
}

SystemConfig config_of(const CommonArgs& a) { return load_config(file_entries_of(a), overrides_of(a)); }

ChannelRealization channel_for(const SystemConfig& cfg, std::uint64_t seed) {
  const Topology topo = build_topology(cfg.radio.n_users, cfg.radio.n_relays, cfg.geometry, seed);
  return sample_channel(topo, cfg.radio.n_subcarriers, cfg.radio, cfg.pathloss, seed);
}

json allocation_json(const Allocation& alloc) {
  json out = json::array();
  for (int n = 0; n < alloc.n_subcarriers(); ++n) {
    json slot{{"subcarrier", n}};
    const auto k = alloc.user_on(n);
    if (!k) {
      slot["mode"] = "idle";
    } else if (const auto* d = std::get_if<Direct>(&alloc.at(*k, n))) {
      slot["user"] = *k;
      slot["mode"] = "direct";
      slot["p_d"] = d->p_d;
    } else {
      const auto& af = std::get<Af>(alloc.at(*k, n));
      slot["user"] = *k;
      slot["mode"] = "af";
      slot["p_bs"] = af.p_bs;
      slot["p_rn"] = af.p_rn;
    }
    out.push_back(std::move(slot));
  }
  return out;
}

json metrics_json(const Metrics& m) {
  return {{"rate_total", m.rate_total},     {"rate_per_subcarrier", m.rate_per_subcarrier},
          {"power_total", m.power_total},   {"ee", m.ee},
          {"ee_per_subcarrier", m.ee_per_subcarrier}, {"rho", m.rho},
          {"tx_power_used", m.tx_power_used}};
}

json trace_json(const SolverTrace& t) {
  return {{"q_sequence", t.q_sequence},
          {"inner_iterations_per_outer", t.inner_iterations_per_outer},
          {"lambda_final", t.lambda_final},
          {"termination", to_string(t.termination)},
          {"f_residual", t.f_residual},
          {"outer_iterations", t.outer_iterations()},
          {"inner_iterations_total", t.inner_iterations_total()}};
}

int cmd_solve(const CommonArgs& a, const std::string& algorithm, bool exact_snr, bool strict_flag) {
  const SystemConfig cfg = config_of(a);
  const bool strict = strict_flag || cfg.strict;
  const ChannelRealization chan = channel_for(cfg, cfg.master_seed);
  Solution sol;
  if (algorithm == "eem")
    sol = solve_eem(chan, cfg.scenario(), cfg.solver);
  else if (algorithm == "sem")
    sol = solve_sem(chan, cfg.scenario(), cfg.solver);
  else
    throw ConfigError("--algorithm must be eem or sem");

  json out{{"algorithm", algorithm},
           {"seed", cfg.master_seed},
           {"allocation", allocation_json(sol.allocation)},
           {"metrics", metrics_json(sol.metrics)},
           {"trace", trace_json(sol.trace)},
           {"lambda", sol.lambda},
           {"q", sol.q}};
  if (exact_snr)
    out["metrics_exact_snr"] =
        metrics_json(compute_metrics(sol.allocation, chan, cfg.radio, cfg.power, SnrMode::exact));
  std::cout << out.dump(2) << '\n';
  if (strict && sol.trace.termination != Termination::converged) {
    std::cerr << "eerelay: solver terminated at " << to_string(sol.trace.termination) << '\n';
    return 2;
  }
  return 0;
}

int cmd_sweep(const CommonArgs& a, const std::string& scenario, std::optional<int> samples,
              const std::string& out_path, const std::string& json_path, unsigned threads) {
  SweepSpec spec = builtin_scenario(scenario);
  apply_entries(spec.base, file_entries_of(a));
  apply_entries(spec.base, overrides_of(a));
  spec.base.validate();
  spec.master_seed = spec.base.master_seed;
  if (samples) spec.samples = *samples;

  SweepOptions opts;
  opts.threads = threads;
  const SweepResult result = run_sweep(spec, opts);

  if (out_path.empty() || out_path == "-") {
    write_csv(std::cout, result.records);
  } else {
    std::ofstream f(out_path);
    if (!f) throw ConfigError("cannot write '" + out_path + "'");
    write_csv(f, result.records);
  }
  if (!json_path.empty()) {
    std::ofstream f(json_path);
    if (!f) throw ConfigError("cannot write '" + json_path + "'");
    write_json(f, result.records);
  }
  for (const auto& r : result.records)
    if (r.flagged)
      std::cerr << "eerelay: " << r.failures << " failed samples at " << r.scenario << '/' << to_string(r.algorithm)
                << " p_max_dbm=" << r.p_max_dbm << '\n';
  return 0;
}

int cmd_oracle(const CommonArgs& a, int seeds) {
  if (seeds < 1) throw ConfigError("--seeds: must be at least 1");
  const SystemConfig cfg = config_of(a);
  json rows = json::array();
  double min_gap = INFINITY;
  for (int i = 0; i < seeds; ++i) {
    const std::uint64_t seed = cfg.master_seed + static_cast<std::uint64_t>(i);
    const ChannelRealization chan = channel_for(cfg, seed);
    const Solution sol = solve_eem(chan, cfg.scenario(), cfg.solver);
    const OracleResult orc = brute_force_eem(chan, cfg.scenario());
    const double oracle_ee = orc.eem.metrics.ee;
    const double gap = oracle_ee > 0.0 ? (sol.metrics.ee - oracle_ee) / oracle_ee : 0.0;
    min_gap = std::min(min_gap, gap);
    rows.push_back({{"seed", seed},
                    {"solver_ee", sol.metrics.ee},
                    {"oracle_ee", oracle_ee},
                    {"relative_gap", gap},
                    {"assignment_match", assignment_of(sol.allocation) == orc.eem_assignment},
                    {"assignments_searched", orc.assignments_searched}});
  }
  json out{{"n_users", cfg.radio.n_users},
           {"n_subcarriers", cfg.radio.n_subcarriers},
           {"n_relays", cfg.radio.n_relays},
           {"p_max_dbm", cfg.p_max_dbm},
           {"instances", rows},
           {"min_relative_gap", min_gap},
           {"pass", min_gap >= -0.01}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_convergence(const CommonArgs& a) {
  const SystemConfig cfg = config_of(a);
  const ChannelRealization chan = channel_for(cfg, cfg.master_seed);
  const Solution sol = solve_eem(chan, cfg.scenario(), cfg.solver);
  const SolverTrace& t = sol.trace;
  int cumulative = 0;
  for (int i = 0; i < t.outer_iterations(); ++i) {
    cumulative += t.inner_iterations_per_outer[static_cast<std::size_t>(i)];
    json line{{"outer", i + 1},
              {"q", t.q_sequence[static_cast<std::size_t>(i)]},
              {"inner_iters", t.inner_iterations_per_outer[static_cast<std::size_t>(i)]},
              {"cumulative_inner_iters", cumulative},
              {"lambda", t.lambda_final[static_cast<std::size_t>(i)]}};
    std::cout << line.dump() << '\n';
  }
  json last{{"termination", to_string(t.termination)},
            {"q_final", t.q_sequence.back()},
            {"f_residual", t.f_residual},
            {"ee", sol.metrics.ee}};
  std::cout << last.dump() << '\n';
  return 0;
}

int cmd_scenarios() {
  for (const auto& s : builtin_scenarios()) {
    std::cout << s.name << ": " << s.description << '\n';
    for (const auto& ax : s.axes) {
      std::cout << "  " << ax.name << ':';
      for (double v : ax.values) std::cout << ' ' << v;
      std::cout << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-efficient power and subcarrier allocation for relay-aided OFDMA"};
  app.require_subcommand(1);

  CommonArgs common;

  auto* solve = app.add_subcommand("solve", "solve one instance, JSON to stdout");
  add_common(solve, common);
  std::string algorithm = "eem";
  bool exact_snr = false, strict = false;
  solve->add_option("--algorithm", algorithm, "eem or sem")->check(CLI::IsMember({"eem", "sem"}));
  solve->add_flag("--exact-snr", exact_snr, "also report metrics under the exact AF SNR");
  solve->add_flag("--strict", strict, "exit 2 unless the solver converged");

  auto* sweep = app.add_subcommand("sweep", "run a built-in sweep, CSV out");
  add_common(sweep, common);
  std::string scenario, out_path, json_path;
  std::optional<int> samples;
  unsigned threads = 0;
  sweep->add_option("--scenario", scenario, "built-in scenario name")->required();
  sweep->add_option("--samples", samples, "samples per grid point");
  sweep->add_option("--out", out_path, "CSV path (default stdout)");
  sweep->add_option("--json", json_path, "also write JSON records here");
  sweep->add_option("--threads", threads, "worker threads (0 = all cores)");

  auto* oracle = app.add_subcommand("oracle", "compare the solver against exhaustive search");
  add_common(oracle, common);
  int seeds = 20;
  oracle->add_option("--seeds", seeds, "number of consecutive seeds");

  auto* conv = app.add_subcommand("convergence", "per-iteration trace, JSON lines");
  add_common(conv, common);

  auto* scen = app.add_subcommand("scenarios", "list built-in sweeps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    if (rc != 0 && e.get_exit_code() != static_cast<int>(CLI::ExitCodes::Success)) {
      if (dynamic_cast<const CLI::CallForHelp*>(&e) == nullptr) std::cerr << app.help();
      return 1;
    }
    return 0;
  }

  try {
    if (*solve) return cmd_solve(common, algorithm, exact_snr, strict);
    if (*sweep) return cmd_sweep(common, scenario, samples, out_path, json_path, threads);
    if (*oracle) return cmd_oracle(common, seeds);
    if (*conv) return cmd_convergence(common);
    if (*scen) return cmd_scenarios();
  } catch (const std::exception& e) {
    std::cerr << "eerelay: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
