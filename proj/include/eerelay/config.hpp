#pragma once

// Scenario configuration: defaults, a flat `key = value` document format
// with optional [section] headers, and validation.
//
//   # comment
//   n_users = 8
//   p_max_dbm = 0
//   [solver]
//   lambda_mode = bisection
//   [pathloss.bs_ue_nlos]
//   intercept_db = 131.1
//
// Sections `radio`, `power`, `geometry`, `solver` and `run` only group
// keys; `pathloss.<class>` sections prefix theirs.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "eerelay/channel.hpp"
#include "eerelay/model.hpp"
#include "eerelay/solver.hpp"

namespace eerelay {

struct SystemConfig {
  RadioConfig radio;
  PowerModel power;
  PathLossModel pathloss;
  Geometry geometry;
  SolverParams solver;
  double p_max_dbm = 0.0;
  std::uint64_t master_seed = 1;
  bool strict = false;

  SystemConfig() { power.p_max = dbm_to_watts(p_max_dbm); }

  Scenario scenario() const { return {radio, power}; }

  /// Sets one key from its textual value. Throws ConfigError naming the key
  /// when it is unknown or the value does not parse.
  void set(std::string_view key, std::string_view value);

  /// Value of a key, formatted as it would be written in a config file.
  std::string get(std::string_view key) const;

  /// Cross-field checks; throws ConfigError naming the offending key.
  void validate() const;

  static const std::vector<std::string>& keys();
};

struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;  ///< 0 for command-line overrides
};

/// Parses a config document into fully-qualified key/value entries.
std::vector<ConfigEntry> parse_config(std::string_view text);

std::vector<ConfigEntry> read_config_file(const std::filesystem::path& path);

/// Applies entries in order; errors carry the entry's line.
void apply_entries(SystemConfig& cfg, const std::vector<ConfigEntry>& entries);

/// Defaults, then file entries, then overrides; validated before returning.
SystemConfig load_config(const std::vector<ConfigEntry>& file_entries, const std::vector<ConfigEntry>& overrides);

SystemConfig load_config(const std::filesystem::path& path, const std::vector<ConfigEntry>& overrides = {});

}  // namespace eerelay
