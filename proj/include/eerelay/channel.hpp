#pragma once

// Cell geometry and channel sampling: a BS at the origin, relays on a ring
// at d_r * radius, users uniform over the disc, path loss plus unit-mean
// Rayleigh power fading on every (link, subcarrier).

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "eerelay/model.hpp"

namespace eerelay {

enum class LinkClass { bs_rn_los, bs_ue_nlos, rn_ue_nlos };

const char* to_string(LinkClass c);

struct PathLossCurve {
  double intercept_db = 0.0;        ///< loss at 1 km
  double slope_db_per_decade = 0.0;
};

/// Log-distance curves per link class, distance in km.
struct PathLossModel {
  PathLossCurve bs_rn_los{100.7, 23.5};
  PathLossCurve bs_ue_nlos{131.1, 42.8};
  PathLossCurve rn_ue_nlos{145.4, 37.5};
  double min_coupling_loss_db = 40.0;

  const PathLossCurve& curve(LinkClass c) const;
  PathLossCurve& curve(LinkClass c);
};

struct Geometry {
  double cell_radius_km = 1.5;
  double d_r = 0.5;  ///< relay distance over cell radius
};

struct Topology {
  double cell_radius_m = 0.0;
  std::vector<Eigen::Vector2d> rn_positions;
  std::vector<Eigen::Vector2d> ue_positions;
  std::vector<int> sector_of_ue;  ///< empty when there are no relays
};

/// Per-subcarrier power gains. Rows of g_rn_ue hold the gain from the
/// user's serving relay only.
struct ChannelRealization {
  Eigen::MatrixXd g_bs_ue;   ///< K x N
  Eigen::MatrixXd g_bs_rn;   ///< M x N
  Eigen::MatrixXd g_rn_ue;   ///< K x N (zero columns when M = 0)
  std::vector<int> serving_relay;  ///< per user, empty when M = 0
  double noise_gap = 0.0;    ///< [W]
  std::uint64_t seed = 0;

  int n_users() const { return static_cast<int>(g_bs_ue.rows()); }
  int n_subcarriers() const { return static_cast<int>(g_bs_ue.cols()); }
  int n_relays() const { return static_cast<int>(g_bs_rn.rows()); }
  bool has_relays() const { return n_relays() > 0; }
};

/// Relays at angles 2*pi*m/M on the ring, users i.i.d. uniform by area.
Topology build_topology(int n_users, int n_relays, const Geometry& geometry, std::uint64_t seed);

/// Index of the relay whose angular sector contains `ue_angle`; sectors are
/// centred on the relay angles 2*pi*m/M.
int assign_sector(double ue_angle, int n_relays);

double path_loss_db(double distance_m, LinkClass link, const PathLossModel& plm);

struct FadingOptions {
  bool enabled = true;
};

ChannelRealization sample_channel(const Topology& topo, int n_subcarriers, const RadioConfig& radio,
                                  const PathLossModel& plm, std::uint64_t seed,
                                  FadingOptions fading = {});

}  // namespace eerelay
