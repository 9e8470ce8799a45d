#pragma once

// Physical-layer formulas for the relay-aided OFDMA downlink: SNR of the
// direct and amplify-and-forward links, link rates, the affine power
// consumption model and the energy-efficiency ratio.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "eerelay/errors.hpp"

namespace eerelay {

struct ChannelRealization;

/// Fixed consumption plus amplifier-scaled transmit power.
struct PowerModel {
  double p_c_bs = 60.0;   ///< fixed BS consumption [W]
  double p_c_rn = 20.0;   ///< fixed consumption per relay [W]
  double xi_bs = 2.6;     ///< reciprocal drain efficiency, BS amplifier
  double xi_rn = 5.0;     ///< reciprocal drain efficiency, relay amplifier
  double p_max = 1.0e-3;  ///< total instantaneous transmit budget [W]

  double fixed_power(int n_relays) const { return p_c_bs + n_relays * p_c_rn; }
};

struct RadioConfig {
  int n_subcarriers = 32;
  int n_users = 8;
  int n_relays = 3;
  double subcarrier_bw_hz = 12.0e3;
  double noise_psd_dbm_hz = -174.0;
  double snr_gap_db = 0.0;
  std::vector<double> weights;  ///< per-user rate weights; empty means all 1

  double weight(int k) const { return weights.empty() ? 1.0 : weights[static_cast<std::size_t>(k)]; }

  /// Delta_gamma * N0 * W, the noise power scaled by the SNR gap [W].
  double noise_gap() const;
};

// --- scalar formulas -------------------------------------------------------

template <typename Scalar>
Scalar dbm_to_watts(Scalar dbm) {
  using std::pow;
  return pow(Scalar(10), (dbm - Scalar(30)) / Scalar(10));
}

template <typename Scalar>
Scalar watts_to_dbm(Scalar watts) {
  using std::log10;
  return Scalar(10) * log10(watts) + Scalar(30);
}

template <typename Scalar>
Scalar db_to_linear(Scalar db) {
  using std::pow;
  return pow(Scalar(10), db / Scalar(10));
}

template <typename Scalar>
Scalar snr_direct(Scalar power, Scalar gain, Scalar noise_gap) {
  if (!(noise_gap > Scalar(0))) throw InvalidParameter("snr_direct: noise_gap must be positive");
  return power * gain / noise_gap;
}

/// Exact end-to-end SNR of a two-hop AF link given the per-hop SNRs.
template <typename Scalar>
Scalar snr_af_exact(Scalar g1, Scalar g2) {
  return g1 * g2 / (g1 + g2 + Scalar(1));
}

/// High-SNR form: the halved harmonic mean of the per-hop SNRs.
template <typename Scalar>
Scalar snr_af_approx(Scalar g1, Scalar g2) {
  const Scalar sum = g1 + g2;
  if (!(sum > Scalar(0))) throw InvalidParameter("snr_af_approx: both hop SNRs are zero");
  return g1 * g2 / sum;
}

template <typename Scalar>
Scalar link_rate_direct(Scalar snr) {
  using std::log2;
  return log2(Scalar(1) + snr);
}

/// AF occupies two time slots, hence the factor one half.
template <typename Scalar>
Scalar link_rate_af(Scalar snr) {
  using std::log2;
  return Scalar(0.5) * log2(Scalar(1) + snr);
}

template <typename Scalar>
Scalar energy_efficiency(Scalar rate, Scalar power) {
  if (!(power > Scalar(0))) throw InvalidParameter("energy_efficiency: power must be positive");
  return rate / power;
}

// --- allocations -----------------------------------------------------------

struct Idle {
  bool operator==(const Idle&) const = default;
};
struct Direct {
  double p_d = 0.0;
  bool operator==(const Direct&) const = default;
};
struct Af {
  double p_bs = 0.0;
  double p_rn = 0.0;
  bool operator==(const Af&) const = default;
};
using Entry = std::variant<Idle, Direct, Af>;

/// Per (user, subcarrier) protocol choice and transmit powers. A non-Idle
/// entry means the corresponding subcarrier indicator is set.
class Allocation {
public:
  Allocation() = default;
  Allocation(int n_users, int n_subcarriers);

  int n_users() const { return n_users_; }
  int n_subcarriers() const { return n_subcarriers_; }

  const Entry& at(int k, int n) const { return entries_[index(k, n)]; }
  Entry& at(int k, int n) { return entries_[index(k, n)]; }

  /// Lowest user index holding a non-Idle entry on subcarrier n.
  std::optional<int> user_on(int n) const;

  /// Left-hand side of the total transmit power constraint.
  double tx_power() const;

  /// Returns a copy with every power multiplied by `factor`.
  Allocation scaled(double factor) const;

  bool operator==(const Allocation&) const = default;

private:
  std::size_t index(int k, int n) const {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(n_users_) + static_cast<std::size_t>(k);
  }

  int n_users_ = 0;
  int n_subcarriers_ = 0;
  std::vector<Entry> entries_;
};

enum class SnrMode { approx, exact };

struct Metrics {
  double rate_total = 0.0;             ///< sum over allocated subcarriers [bits/s/Hz]
  double rate_per_subcarrier = 0.0;    ///< rate_total / N
  double power_total = 0.0;            ///< [W]
  double ee = 0.0;                     ///< rate_total / power_total [bits/J/Hz]
  double ee_per_subcarrier = 0.0;      ///< rate_per_subcarrier / power_total
  double rho = 0.0;                    ///< fraction of subcarriers carrying AF
  double tx_power_used = 0.0;          ///< [W]
};

enum class Constraint {
  power_budget,             // total transmit power within p_max
  one_protocol_per_pair,    // direct and AF not both on (k, n)
  one_user_per_subcarrier,  // at most one user per subcarrier
  nonnegative_power,
  relay_available,          // AF needs a relay
  dimensions,
};

std::string to_string(Constraint c);

struct Violation {
  Constraint constraint;
  int user = -1;
  int subcarrier = -1;
  std::string message;
};

double system_rate(const Allocation& alloc, const ChannelRealization& chan, const RadioConfig& cfg,
                   SnrMode mode = SnrMode::approx);

double system_power(const Allocation& alloc, const PowerModel& pm, int n_relays);

double af_fraction(const Allocation& alloc);

std::vector<Violation> check_feasibility(const Allocation& alloc, const RadioConfig& cfg,
                                         const PowerModel& pm);

Metrics compute_metrics(const Allocation& alloc, const ChannelRealization& chan, const RadioConfig& cfg,
                        const PowerModel& pm, SnrMode mode = SnrMode::approx);

}  // namespace eerelay
