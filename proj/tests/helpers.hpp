#pragma once

#include "eerelay/channel.hpp"
#include "eerelay/config.hpp"

namespace eerelay::test {

// Hand-built channel with every gain set to `g`; users served by relay 0.
inline ChannelRealization flat_channel(int k, int n, int m, double g, double noise_gap) {
  ChannelRealization c;
  c.g_bs_ue = Eigen::MatrixXd::Constant(k, n, g);
  c.g_bs_rn = Eigen::MatrixXd::Constant(m, n, g);
  c.g_rn_ue = Eigen::MatrixXd::Constant(k, n, m > 0 ? g : 0.0);
  if (m > 0) c.serving_relay.assign(static_cast<std::size_t>(k), 0);
  c.noise_gap = noise_gap;
  return c;
}

inline SystemConfig small_config(int k, int n, int m, double p_max_dbm = 0.0) {
  SystemConfig cfg;
  cfg.set("n_users", std::to_string(k));
  cfg.set("n_subcarriers", std::to_string(n));
  cfg.set("n_relays", std::to_string(m));
  cfg.set("p_max_dbm", std::to_string(p_max_dbm));
  return cfg;
}

inline ChannelRealization random_channel(const SystemConfig& cfg, std::uint64_t seed) {
  const Topology topo = build_topology(cfg.radio.n_users, cfg.radio.n_relays, cfg.geometry, seed);
  return sample_channel(topo, cfg.radio.n_subcarriers, cfg.radio, cfg.pathloss, seed);
}

}  // namespace eerelay::test
