#pragma once

// Monte-Carlo sweeps: a Cartesian grid of scenario parameters, a fixed
// number of topology + channel samples per grid point, and per-algorithm
// aggregation into flat records for CSV/JSON output.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "eerelay/config.hpp"
#include "eerelay/solver.hpp"

namespace eerelay {

enum class Algorithm { eem, sem };

const char* to_string(Algorithm a);

struct SweepAxis {
  std::string name;  ///< p_max_dbm, n_users, n_subcarriers, n_relays, cell_radius_km or d_r
  std::vector<double> values;
};

struct SweepSpec {
  std::string name;
  std::string description;
  SystemConfig base;
  std::vector<SweepAxis> axes;
  int samples = 200;
  std::vector<Algorithm> algorithms{Algorithm::eem, Algorithm::sem};
  std::uint64_t master_seed = 1;

  /// Throws ConfigError for unknown axes, empty axes, or invalid grid points.
  void validate() const;
};

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Arithmetic mean and sample standard deviation over sqrt(n).
MeanStderr aggregate(const std::vector<double>& values);

struct ResultRecord {
  std::string scenario;
  Algorithm algorithm = Algorithm::eem;
  double p_max_dbm = 0.0;
  int n_users = 0;
  int n_subcarriers = 0;
  int n_relays = 0;
  double cell_radius_km = 0.0;
  double d_r = 0.0;
  int samples = 0;   ///< successful samples entering the means
  int failures = 0;  ///< solver errors or inner-limit terminations
  bool flagged = false;  ///< failures above 1% of requested samples

  MeanStderr se;           ///< spectral efficiency per subcarrier
  MeanStderr ee;           ///< efficiency per subcarrier [bits/J/Hz]
  MeanStderr rho;
  MeanStderr tx_power;
  MeanStderr outer_iters;
  MeanStderr inner_iters;  ///< summed over outer iterations
};

/// Raw per-sample metrics for one grid point and algorithm, in sample order.
struct SampleRow {
  std::uint64_t seed = 0;
  bool failed = false;
  Metrics metrics;
  int outer_iterations = 0;
  int inner_iterations = 0;
};

struct SweepOptions {
  unsigned threads = 0;  ///< 0 means hardware concurrency
  bool keep_samples = false;
};

struct SweepResult {
  std::vector<ResultRecord> records;
  /// Parallel to records when SweepOptions::keep_samples is set.
  std::vector<std::vector<SampleRow>> samples;
};

SweepResult run_sweep(const SweepSpec& spec, const SweepOptions& options = {});

/// Configuration of one grid point: `base` with the axis values applied.
SystemConfig grid_point_config(const SystemConfig& base, const std::vector<std::pair<std::string, double>>& point);

std::vector<SweepSpec> builtin_scenarios();

/// Looks a built-in scenario up by name; throws ConfigError if absent.
SweepSpec builtin_scenario(const std::string& name);

extern const char* const kCsvHeader;

void write_csv(std::ostream& out, const std::vector<ResultRecord>& records);
void write_json(std::ostream& out, const std::vector<ResultRecord>& records);

}  // namespace eerelay
