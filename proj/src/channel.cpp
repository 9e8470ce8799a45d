#include "eerelay/channel.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <utility>

namespace eerelay {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Independent streams per purpose so that, for one seed, user positions and
// BS->UE fading do not depend on how many relays are deployed.
enum Stream : std::uint64_t { topology_stream = 0, bs_ue_stream = 1, bs_rn_stream = 2, rn_ue_stream = 3 };

std::mt19937_64 make_engine(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

// Coincident positions fall back to the minimum-coupling clamp.
double loss_between(const Eigen::Vector2d& a, const Eigen::Vector2d& b, LinkClass link, const PathLossModel& plm) {
  const double d = (a - b).norm();
  return d > 0.0 ? path_loss_db(d, link, plm) : plm.min_coupling_loss_db;
}

double unit_exponential(std::mt19937_64& rng) {
  std::exponential_distribution<double> dist(1.0);
  double e = 0.0;
  do {
    e = dist(rng);
  } while (!(e > 0.0));
  return e;
}

}  // namespace

const char* to_string(LinkClass c) {
  switch (c) {
    case LinkClass::bs_rn_los: return "bs_rn_los";
    case LinkClass::bs_ue_nlos: return "bs_ue_nlos";
    case LinkClass::rn_ue_nlos: return "rn_ue_nlos";
  }
  return "unknown";
}

const PathLossCurve& PathLossModel::curve(LinkClass c) const {
  switch (c) {
    case LinkClass::bs_rn_los: return bs_rn_los;
    case LinkClass::bs_ue_nlos: return bs_ue_nlos;
    case LinkClass::rn_ue_nlos: return rn_ue_nlos;
  }
  throw InvalidParameter("unknown link class");
}

PathLossCurve& PathLossModel::curve(LinkClass c) {
  return const_cast<PathLossCurve&>(std::as_const(*this).curve(c));
}

Topology build_topology(int n_users, int n_relays, const Geometry& geometry, std::uint64_t seed) {
  if (n_users < 1) throw InvalidParameter("build_topology: need at least one user");
  if (n_relays < 0) throw InvalidParameter("build_topology: negative relay count");
  if (!(geometry.cell_radius_km > 0.0)) throw InvalidParameter("build_topology: cell radius must be positive");
  if (n_relays > 0 && !(geometry.d_r > 0.0 && geometry.d_r < 1.0))
    throw InvalidParameter("build_topology: d_r must lie in (0, 1) when relays are deployed");

  Topology topo;
  topo.cell_radius_m = geometry.cell_radius_km * 1000.0;

  const double ring = geometry.d_r * topo.cell_radius_m;
  topo.rn_positions.reserve(static_cast<std::size_t>(n_relays));
  for (int m = 0; m < n_relays; ++m) {
    const double angle = kTwoPi * m / n_relays;
    topo.rn_positions.emplace_back(ring * std::cos(angle), ring * std::sin(angle));
  }

  auto rng = make_engine(seed, topology_stream);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  topo.ue_positions.reserve(static_cast<std::size_t>(n_users));
  for (int k = 0; k < n_users; ++k) {
    const double r = topo.cell_radius_m * std::sqrt(unit(rng));
    const double angle = kTwoPi * unit(rng);
    topo.ue_positions.emplace_back(r * std::cos(angle), r * std::sin(angle));
  }

  if (n_relays > 0) {
    topo.sector_of_ue.reserve(topo.ue_positions.size());
    for (const auto& p : topo.ue_positions) topo.sector_of_ue.push_back(assign_sector(std::atan2(p.y(), p.x()), n_relays));
  }
  return topo;
}

int assign_sector(double ue_angle, int n_relays) {
  if (n_relays < 1) throw InvalidParameter("assign_sector: no relays to assign");
  const double width = kTwoPi / n_relays;
  // Shift by half a sector so sector m is centred on relay angle m * width.
  double a = std::fmod(ue_angle + 0.5 * width, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  const int idx = static_cast<int>(std::floor(a / width));
  return idx >= n_relays ? n_relays - 1 : idx;
}

double path_loss_db(double distance_m, LinkClass link, const PathLossModel& plm) {
  if (!(distance_m > 0.0)) throw InvalidParameter("path_loss_db: distance must be positive");
  const PathLossCurve& c = plm.curve(link);
  const double loss = c.intercept_db + c.slope_db_per_decade * std::log10(distance_m / 1000.0);
  return std::max(loss, plm.min_coupling_loss_db);
}

ChannelRealization sample_channel(const Topology& topo, int n_subcarriers, const RadioConfig& radio,
                                  const PathLossModel& plm, std::uint64_t seed, FadingOptions fading) {
  if (n_subcarriers < 1) throw InvalidParameter("sample_channel: need at least one subcarrier");
  const int n_users = static_cast<int>(topo.ue_positions.size());
  const int n_relays = static_cast<int>(topo.rn_positions.size());

  ChannelRealization chan;
  chan.seed = seed;
  chan.noise_gap = radio.noise_gap();
  chan.serving_relay = topo.sector_of_ue;
  chan.g_bs_ue.resize(n_users, n_subcarriers);
  chan.g_bs_rn.resize(n_relays, n_subcarriers);
  chan.g_rn_ue = Eigen::MatrixXd::Zero(n_users, n_subcarriers);

  auto fill_row = [&](Eigen::MatrixXd& g, int row, double loss_db, std::mt19937_64& rng) {
    const double mean_gain = std::pow(10.0, -loss_db / 10.0);
    for (int n = 0; n < n_subcarriers; ++n) g(row, n) = fading.enabled ? mean_gain * unit_exponential(rng) : mean_gain;
  };

  const Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  auto rng_bs_ue = make_engine(seed, bs_ue_stream);
  for (int k = 0; k < n_users; ++k)
    fill_row(chan.g_bs_ue, k, loss_between(topo.ue_positions[k], origin, LinkClass::bs_ue_nlos, plm), rng_bs_ue);

  auto rng_bs_rn = make_engine(seed, bs_rn_stream);
  for (int m = 0; m < n_relays; ++m)
    fill_row(chan.g_bs_rn, m, loss_between(topo.rn_positions[m], origin, LinkClass::bs_rn_los, plm), rng_bs_rn);

  if (n_relays > 0) {
    auto rng_rn_ue = make_engine(seed, rn_ue_stream);
    for (int k = 0; k < n_users; ++k) {
      const auto& relay = topo.rn_positions[static_cast<std::size_t>(topo.sector_of_ue[k])];
      fill_row(chan.g_rn_ue, k, loss_between(topo.ue_positions[k], relay, LinkClass::rn_ue_nlos, plm), rng_rn_ue);
    }
  }
  return chan;
}

}  // namespace eerelay
