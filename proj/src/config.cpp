#include "eerelay/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "format.hpp"

namespace eerelay {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) return s.substr(1, s.size() - 2);
  return s;
}

using detail::format_double;

double parse_double(std::string_view key, std::string_view text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v))
    throw ConfigError(std::string(key) + ": expected a finite number, got '" + std::string(text) + "'");
  return v;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view text) {
  Int v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(text) + "'");
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(std::string(key) + ": expected true or false, got '" + std::string(text) + "'");
}

struct KeyHandler {
  std::string name;
  std::function<void(SystemConfig&, std::string_view, std::string_view)> set;
  std::function<std::string(const SystemConfig&)> get;
};

template <typename Getter>
KeyHandler number_key(std::string name, Getter field) {
  return {std::move(name),
          [field](SystemConfig& c, std::string_view k, std::string_view v) { field(c) = parse_double(k, v); },
          [field](const SystemConfig& c) {
            SystemConfig copy = c;
            return format_double(field(copy));
          }};
}

template <typename Getter>
KeyHandler int_key(std::string name, Getter field) {
  return {std::move(name),
          [field](SystemConfig& c, std::string_view k, std::string_view v) {
            field(c) = parse_int<std::remove_reference_t<decltype(field(c))>>(k, v);
          },
          [field](const SystemConfig& c) {
            SystemConfig copy = c;
            return std::to_string(field(copy));
          }};
}

std::vector<KeyHandler> build_handlers() {
  std::vector<KeyHandler> h;
  h.push_back(int_key("n_subcarriers", [](SystemConfig& c) -> int& { return c.radio.n_subcarriers; }));
  h.push_back(int_key("n_users", [](SystemConfig& c) -> int& { return c.radio.n_users; }));
  h.push_back(int_key("n_relays", [](SystemConfig& c) -> int& { return c.radio.n_relays; }));
  h.push_back(number_key("subcarrier_bw_hz", [](SystemConfig& c) -> double& { return c.radio.subcarrier_bw_hz; }));
  h.push_back(number_key("noise_psd_dbm_hz", [](SystemConfig& c) -> double& { return c.radio.noise_psd_dbm_hz; }));
  h.push_back(number_key("snr_gap_db", [](SystemConfig& c) -> double& { return c.radio.snr_gap_db; }));

  h.push_back(number_key("p_c_bs", [](SystemConfig& c) -> double& { return c.power.p_c_bs; }));
  h.push_back(number_key("p_c_rn", [](SystemConfig& c) -> double& { return c.power.p_c_rn; }));
  h.push_back(number_key("xi_bs", [](SystemConfig& c) -> double& { return c.power.xi_bs; }));
  h.push_back(number_key("xi_rn", [](SystemConfig& c) -> double& { return c.power.xi_rn; }));
  h.push_back({"p_max_dbm",
               [](SystemConfig& c, std::string_view k, std::string_view v) {
                 c.p_max_dbm = parse_double(k, v);
                 c.power.p_max = dbm_to_watts(c.p_max_dbm);
               },
               [](const SystemConfig& c) { return format_double(c.p_max_dbm); }});

  h.push_back(number_key("cell_radius_km", [](SystemConfig& c) -> double& { return c.geometry.cell_radius_km; }));
  h.push_back(number_key("d_r", [](SystemConfig& c) -> double& { return c.geometry.d_r; }));

  for (LinkClass lc : {LinkClass::bs_rn_los, LinkClass::bs_ue_nlos, LinkClass::rn_ue_nlos}) {
    const std::string prefix = std::string("pathloss.") + to_string(lc) + ".";
    h.push_back(number_key(prefix + "intercept_db",
                           [lc](SystemConfig& c) -> double& { return c.pathloss.curve(lc).intercept_db; }));
    h.push_back(number_key(prefix + "slope_db",
                           [lc](SystemConfig& c) -> double& { return c.pathloss.curve(lc).slope_db_per_decade; }));
  }
  h.push_back(number_key("pathloss.min_coupling_loss_db",
                         [](SystemConfig& c) -> double& { return c.pathloss.min_coupling_loss_db; }));

  h.push_back(int_key("i_outer_max", [](SystemConfig& c) -> int& { return c.solver.i_outer_max; }));
  h.push_back(int_key("i_inner_max", [](SystemConfig& c) -> int& { return c.solver.i_inner_max; }));
  h.push_back(number_key("eps_outer", [](SystemConfig& c) -> double& { return c.solver.eps_outer; }));
  h.push_back(number_key("eps_inner", [](SystemConfig& c) -> double& { return c.solver.eps_inner; }));
  h.push_back(number_key("lambda_init", [](SystemConfig& c) -> double& { return c.solver.lambda_init; }));
  h.push_back({"lambda_step",
               [](SystemConfig& c, std::string_view k, std::string_view v) {
                 if (v == "auto")
                   c.solver.lambda_step.reset();
                 else
                   c.solver.lambda_step = parse_double(k, v);
               },
               [](const SystemConfig& c) {
                 return c.solver.lambda_step ? format_double(*c.solver.lambda_step) : std::string("auto");
               }});
  h.push_back({"lambda_mode",
               [](SystemConfig& c, std::string_view k, std::string_view v) {
                 if (v == "bisection")
                   c.solver.lambda_mode = LambdaMode::bisection;
                 else if (v == "subgradient")
                   c.solver.lambda_mode = LambdaMode::subgradient;
                 else
                   throw ConfigError(std::string(k) + ": expected bisection or subgradient, got '" + std::string(v) + "'");
               },
               [](const SystemConfig& c) { return std::string(to_string(c.solver.lambda_mode)); }});
  h.push_back({"tie_break",
               [](SystemConfig& c, std::string_view k, std::string_view v) {
                 if (v == "lowest-index" || v == "lowest_index")
                   c.solver.tie_break = TieBreak::lowest_index;
                 else if (v == "seeded-random" || v == "seeded_random")
                   c.solver.tie_break = TieBreak::seeded_random;
                 else
                   throw ConfigError(std::string(k) + ": expected lowest-index or seeded-random, got '" +
                                     std::string(v) + "'");
               },
               [](const SystemConfig& c) { return std::string(to_string(c.solver.tie_break)); }});
  h.push_back(int_key("tie_seed", [](SystemConfig& c) -> std::uint64_t& { return c.solver.tie_seed; }));
  h.push_back({"fill_budget",
               [](SystemConfig& c, std::string_view k, std::string_view v) { c.solver.fill_budget = parse_bool(k, v); },
               [](const SystemConfig& c) { return std::string(c.solver.fill_budget ? "true" : "false"); }});

  h.push_back(int_key("master_seed", [](SystemConfig& c) -> std::uint64_t& { return c.master_seed; }));
  h.push_back({"strict",
               [](SystemConfig& c, std::string_view k, std::string_view v) { c.strict = parse_bool(k, v); },
               [](const SystemConfig& c) { return std::string(c.strict ? "true" : "false"); }});
  return h;
}

const std::vector<KeyHandler>& handlers() {
  static const std::vector<KeyHandler> h = build_handlers();
  return h;
}

const KeyHandler* find_handler(std::string_view key) {
  for (const auto& h : handlers())
    if (h.name == key) return &h;
  return nullptr;
}

constexpr std::array<std::string_view, 5> kGroupingSections{"radio", "power", "geometry", "solver", "run"};

std::string qualify(std::string_view section, std::string_view key) {
  if (section.empty()) return std::string(key);
  if (std::find(kGroupingSections.begin(), kGroupingSections.end(), section) != kGroupingSections.end())
    return std::string(key);
  return std::string(section) + "." + std::string(key);
}

}  // namespace

void SystemConfig::set(std::string_view key, std::string_view value) {
  // Grouping prefixes are accepted on the command line too, e.g. solver.eps_inner.
  std::string_view bare = key;
  if (const auto dot = key.find('.'); dot != std::string_view::npos && !find_handler(key)) {
    const auto section = key.substr(0, dot);
    if (std::find(kGroupingSections.begin(), kGroupingSections.end(), section) != kGroupingSections.end())
      bare = key.substr(dot + 1);
  }
  const KeyHandler* h = find_handler(bare);
  if (!h) throw ConfigError("unknown key '" + std::string(key) + "'");
  h->set(*this, bare, unquote(trim(value)));
}

std::string SystemConfig::get(std::string_view key) const {
  const KeyHandler* h = find_handler(key);
  if (!h) throw ConfigError("unknown key '" + std::string(key) + "'");
  return h->get(*this);
}

const std::vector<std::string>& SystemConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& h : handlers()) out.push_back(h.name);
    return out;
  }();
  return names;
}

void SystemConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& what) { throw ConfigError(key + ": " + what); };
  if (radio.n_subcarriers < 1) fail("n_subcarriers", "must be at least 1");
  if (radio.n_users < 1) fail("n_users", "must be at least 1");
  if (radio.n_relays < 0) fail("n_relays", "must be non-negative");
  if (!(radio.subcarrier_bw_hz > 0.0)) fail("subcarrier_bw_hz", "must be positive");
  if (!(radio.noise_gap() > 0.0) || !std::isfinite(radio.noise_gap()))
    fail("noise_psd_dbm_hz", "noise gap product must be positive and finite");
  if (!radio.weights.empty() && static_cast<int>(radio.weights.size()) != radio.n_users)
    fail("weights", "need one weight per user");

  if (!(power.xi_bs > 1.0)) fail("xi_bs", "must exceed 1 (xi > 1)");
  if (!(power.xi_rn > 1.0)) fail("xi_rn", "must exceed 1 (xi > 1)");
  if (!(power.p_c_bs >= 0.0)) fail("p_c_bs", "must be non-negative");
  if (!(power.p_c_rn >= 0.0)) fail("p_c_rn", "must be non-negative");
  if (!(power.p_max > 0.0) || !std::isfinite(power.p_max)) fail("p_max_dbm", "budget must be positive and finite");
  if (!(power.fixed_power(radio.n_relays) > 0.0))
    fail("p_c_bs", "fixed consumption must be positive so that the efficiency is defined");

  if (!(geometry.cell_radius_km > 0.0)) fail("cell_radius_km", "must be positive");
  if (radio.n_relays > 0 && !(geometry.d_r > 0.0 && geometry.d_r < 1.0))
    fail("d_r", "must lie in (0, 1) when n_relays > 0");

  for (LinkClass lc : {LinkClass::bs_rn_los, LinkClass::bs_ue_nlos, LinkClass::rn_ue_nlos})
    if (!(pathloss.curve(lc).slope_db_per_decade > 0.0))
      fail(std::string("pathloss.") + to_string(lc) + ".slope_db", "must be positive");

  try {
    solver.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }
}

std::vector<ConfigEntry> parse_config(std::string_view text) {
  std::vector<ConfigEntry> out;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) throw ConfigError("empty section name", line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key before '='", line_no);
    if (value.empty()) throw ConfigError("missing value for '" + std::string(key) + "'", line_no);
    out.push_back({qualify(section, key), std::string(value), line_no});
  }
  return out;
}

std::vector<ConfigEntry> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_entries(SystemConfig& cfg, const std::vector<ConfigEntry>& entries) {
  for (const auto& e : entries) {
    try {
      cfg.set(e.key, e.value);
    } catch (const ConfigError& err) {
      if (e.line > 0) throw ConfigError(err.what(), e.line);
      throw;
    }
  }
}

SystemConfig load_config(const std::vector<ConfigEntry>& file_entries, const std::vector<ConfigEntry>& overrides) {
  SystemConfig cfg;
  apply_entries(cfg, file_entries);
  apply_entries(cfg, overrides);
  cfg.validate();
  return cfg;
}

SystemConfig load_config(const std::filesystem::path& path, const std::vector<ConfigEntry>& overrides) {
  return load_config(read_config_file(path), overrides);
}

}  // namespace eerelay
