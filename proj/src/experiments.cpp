#include "eerelay/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "format.hpp"

namespace eerelay {

namespace {

using detail::format_double;

const std::vector<std::string> kAxisNames{"p_max_dbm", "n_users", "n_subcarriers", "n_relays", "cell_radius_km", "d_r"};

bool integer_axis(const std::string& name) {
  return name == "n_users" || name == "n_subcarriers" || name == "n_relays";
}

std::vector<std::vector<std::pair<std::string, double>>> grid_points(const std::vector<SweepAxis>& axes) {
  std::vector<std::vector<std::pair<std::string, double>>> points{{}};
  for (const auto& axis : axes) {
    std::vector<std::vector<std::pair<std::string, double>>> next;
    for (const auto& p : points) {
      for (double v : axis.values) {
        auto q = p;
        q.emplace_back(axis.name, v);
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

SampleRow run_sample(const SystemConfig& cfg, Algorithm algorithm, const ChannelRealization& chan) {
  SampleRow row;
  row.seed = chan.seed;
  try {
    const Scenario sc = cfg.scenario();
    const Solution sol =
        algorithm == Algorithm::eem ? solve_eem(chan, sc, cfg.solver) : solve_sem(chan, sc, cfg.solver);
    row.metrics = sol.metrics;
    row.outer_iterations = sol.trace.outer_iterations();
    row.inner_iterations = sol.trace.inner_iterations_total();
    row.failed = sol.trace.termination == Termination::inner_limit;
  } catch (const std::exception&) {
    row.failed = true;
  }
  return row;
}

std::vector<double> pick(const std::vector<const SampleRow*>& rows, double (*field)(const SampleRow&)) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto* r : rows) out.push_back(field(*r));
  return out;
}

ResultRecord summarise(const std::string& scenario, Algorithm algorithm, const SystemConfig& cfg,
                       const std::vector<SampleRow>& rows, int requested) {
  ResultRecord rec;
  rec.scenario = scenario;
  rec.algorithm = algorithm;
  rec.p_max_dbm = cfg.p_max_dbm;
  rec.n_users = cfg.radio.n_users;
  rec.n_subcarriers = cfg.radio.n_subcarriers;
  rec.n_relays = cfg.radio.n_relays;
  rec.cell_radius_km = cfg.geometry.cell_radius_km;
  rec.d_r = cfg.geometry.d_r;

  std::vector<const SampleRow*> ok;
  for (const auto& r : rows) {
    if (r.failed)
      ++rec.failures;
    else
      ok.push_back(&r);
  }
  rec.samples = static_cast<int>(ok.size());
  rec.flagged = rec.failures * 100 > requested;
  if (ok.empty()) return rec;

  rec.se = aggregate(pick(ok, [](const SampleRow& r) { return r.metrics.rate_per_subcarrier; }));
  rec.ee = aggregate(pick(ok, [](const SampleRow& r) { return r.metrics.ee_per_subcarrier; }));
  rec.rho = aggregate(pick(ok, [](const SampleRow& r) { return r.metrics.rho; }));
  rec.tx_power = aggregate(pick(ok, [](const SampleRow& r) { return r.metrics.tx_power_used; }));
  rec.outer_iters = aggregate(pick(ok, [](const SampleRow& r) { return static_cast<double>(r.outer_iterations); }));
  rec.inner_iters = aggregate(pick(ok, [](const SampleRow& r) { return static_cast<double>(r.inner_iterations); }));
  return rec;
}

SweepAxis axis(std::string name, std::vector<double> values) { return {std::move(name), std::move(values)}; }

std::vector<double> p_max_axis() {
  std::vector<double> v;
  for (int dbm = 0; dbm <= 60; dbm += 5) v.push_back(dbm);
  return v;
}

}  // namespace

const char* to_string(Algorithm a) { return a == Algorithm::eem ? "EEM" : "SEM"; }

void SweepSpec::validate() const {
  if (samples < 1) throw ConfigError("samples: must be at least 1");
  if (algorithms.empty()) throw ConfigError("algorithms: at least one algorithm is required");
  for (const auto& a : axes) {
    if (std::find(kAxisNames.begin(), kAxisNames.end(), a.name) == kAxisNames.end())
      throw ConfigError("unknown sweep axis '" + a.name + "'");
    if (a.values.empty()) throw ConfigError("sweep axis '" + a.name + "' has no values");
  }
  for (const auto& point : grid_points(axes)) grid_point_config(base, point).validate();
}

MeanStderr aggregate(const std::vector<double>& values) {
  if (values.empty()) throw EmptyInput("aggregate: no values");
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

SystemConfig grid_point_config(const SystemConfig& base, const std::vector<std::pair<std::string, double>>& point) {
  SystemConfig cfg = base;
  for (const auto& [name, value] : point)
    cfg.set(name, integer_axis(name) ? std::to_string(std::llround(value)) : format_double(value));
  return cfg;
}

SweepResult run_sweep(const SweepSpec& spec, const SweepOptions& options) {
  spec.validate();
  const auto points = grid_points(spec.axes);
  std::vector<SystemConfig> configs;
  configs.reserve(points.size());
  for (const auto& p : points) configs.push_back(grid_point_config(spec.base, p));

  const std::size_t n_alg = spec.algorithms.size();
  const std::size_t n_samples = static_cast<std::size_t>(spec.samples);
  // rows[point][algorithm][sample]
  std::vector<std::vector<std::vector<SampleRow>>> rows(
      points.size(), std::vector<std::vector<SampleRow>>(n_alg, std::vector<SampleRow>(n_samples)));

  const std::size_t n_tasks = points.size() * n_samples;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < n_tasks; t = next++) {
      const std::size_t pi = t / n_samples;
      const std::size_t s = t % n_samples;
      const SystemConfig& cfg = configs[pi];
      const std::uint64_t seed = spec.master_seed + s;
      ChannelRealization chan;
      try {
        const Topology topo = build_topology(cfg.radio.n_users, cfg.radio.n_relays, cfg.geometry, seed);
        chan = sample_channel(topo, cfg.radio.n_subcarriers, cfg.radio, cfg.pathloss, seed);
      } catch (const std::exception&) {
        for (std::size_t a = 0; a < n_alg; ++a) rows[pi][a][s] = SampleRow{seed, true, {}, 0, 0};
        continue;
      }
      for (std::size_t a = 0; a < n_alg; ++a) rows[pi][a][s] = run_sample(cfg, spec.algorithms[a], chan);
    }
  };

  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, n_tasks)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  SweepResult result;
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    for (std::size_t a = 0; a < n_alg; ++a) {
      result.records.push_back(summarise(spec.name, spec.algorithms[a], configs[pi], rows[pi][a], spec.samples));
      if (options.keep_samples) result.samples.push_back(std::move(rows[pi][a]));
    }
  }
  return result;
}

std::vector<SweepSpec> builtin_scenarios() {
  std::vector<SweepSpec> out;

  {
    SweepSpec s;
    s.name = "convergence";
    s.description = "small systems without relays, P_max 0 dBm, radius 1 km; iteration counts to convergence";
    s.base.set("n_relays", "0");
    s.base.set("p_max_dbm", "0");
    s.base.set("cell_radius_km", "1");
    s.base.set("d_r", "0.5");
    s.base.set("n_subcarriers", "8");
    s.axes = {axis("n_users", {2, 4, 8}), axis("n_subcarriers", {2, 8})};
    s.algorithms = {Algorithm::eem};
    out.push_back(std::move(s));
  }
  {
    SweepSpec s;
    s.name = "users";
    s.description = "effect of the number of users versus P_max (N = 32, M = 3, d_r = 0.5, radius 1.5 km)";
    s.base.set("n_subcarriers", "32");
    s.base.set("n_relays", "3");
    s.base.set("d_r", "0.5");
    s.base.set("cell_radius_km", "1.5");
    s.axes = {axis("n_users", {4, 8, 16}), axis("p_max_dbm", p_max_axis())};
    out.push_back(std::move(s));
  }
  {
    SweepSpec s;
    s.name = "subcarriers";
    s.description = "effect of the number of subcarriers versus P_max (K = 8, M = 3, d_r = 0.5, radius 1.5 km)";
    s.base.set("n_users", "8");
    s.base.set("n_relays", "3");
    s.base.set("d_r", "0.5");
    s.base.set("cell_radius_km", "1.5");
    s.axes = {axis("n_subcarriers", {16, 32, 64}), axis("p_max_dbm", p_max_axis())};
    out.push_back(std::move(s));
  }
  {
    SweepSpec s;
    s.name = "radius";
    s.description = "cell radius versus number of relays (K = 8, N = 32, d_r = 0.5, P_max 0 dBm)";
    s.base.set("n_users", "8");
    s.base.set("n_subcarriers", "32");
    s.base.set("d_r", "0.5");
    s.base.set("p_max_dbm", "0");
    s.axes = {axis("cell_radius_km", {0.75, 1, 1.25, 1.5, 1.75, 2}), axis("n_relays", {0, 1, 2, 3, 5, 6})};
    out.push_back(std::move(s));
  }
  {
    SweepSpec s;
    s.name = "d_r";
    s.description = "relay placement versus number of relays (K = 8, N = 32, radius 1.5 km, P_max 0 dBm)";
    s.base.set("n_users", "8");
    s.base.set("n_subcarriers", "32");
    s.base.set("cell_radius_km", "1.5");
    s.base.set("p_max_dbm", "0");
    s.axes = {axis("d_r", {0.1, 0.3, 0.5, 0.7, 0.9}), axis("n_relays", {0, 1, 2, 3, 5, 6})};
    out.push_back(std::move(s));
  }
  return out;
}

SweepSpec builtin_scenario(const std::string& name) {
  for (auto& s : builtin_scenarios())
    if (s.name == name) return s;
  throw ConfigError("unknown scenario '" + name + "'");
}

const char* const kCsvHeader =
    "scenario,algorithm,p_max_dbm,n_users,n_subcarriers,n_relays,cell_radius_km,d_r,samples,failures,se_mean,"
    "se_stderr,ee_mean,ee_stderr,rho_mean,rho_stderr,txpower_mean,outer_iters_mean,inner_iters_mean";

void write_csv(std::ostream& out, const std::vector<ResultRecord>& records) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.scenario << ',' << to_string(r.algorithm) << ',' << format_double(r.p_max_dbm) << ',' << r.n_users << ','
        << r.n_subcarriers << ',' << r.n_relays << ',' << format_double(r.cell_radius_km) << ','
        << format_double(r.d_r) << ',' << r.samples << ',' << r.failures << ',' << format_double(r.se.mean) << ','
        << format_double(r.se.stderr_) << ',' << format_double(r.ee.mean) << ',' << format_double(r.ee.stderr_)
        << ',' << format_double(r.rho.mean) << ',' << format_double(r.rho.stderr_) << ','
        << format_double(r.tx_power.mean) << ',' << format_double(r.outer_iters.mean) << ','
        << format_double(r.inner_iters.mean) << '\n';
  }
}

void write_json(std::ostream& out, const std::vector<ResultRecord>& records) {
  auto ms = [](const MeanStderr& m) { return nlohmann::json{{"mean", m.mean}, {"stderr", m.stderr_}}; };
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) {
    arr.push_back({{"scenario", r.scenario},
                   {"algorithm", to_string(r.algorithm)},
                   {"p_max_dbm", r.p_max_dbm},
                   {"n_users", r.n_users},
                   {"n_subcarriers", r.n_subcarriers},
                   {"n_relays", r.n_relays},
                   {"cell_radius_km", r.cell_radius_km},
                   {"d_r", r.d_r},
                   {"samples", r.samples},
                   {"failures", r.failures},
                   {"flagged", r.flagged},
                   {"se", ms(r.se)},
                   {"ee", ms(r.ee)},
                   {"rho", ms(r.rho)},
                   {"txpower", ms(r.tx_power)},
                   {"outer_iters", ms(r.outer_iters)},
                   {"inner_iters", ms(r.inner_iters)}});
  }
  out << arr.dump(2) << '\n';
}

}  // namespace eerelay
