#include "eerelay/model.hpp"

#include "eerelay/channel.hpp"

namespace eerelay {

double RadioConfig::noise_gap() const {
  return db_to_linear(snr_gap_db) * dbm_to_watts(noise_psd_dbm_hz) * subcarrier_bw_hz;
}

Allocation::Allocation(int n_users, int n_subcarriers)
    : n_users_(n_users),
      n_subcarriers_(n_subcarriers),
      entries_(static_cast<std::size_t>(n_users) * static_cast<std::size_t>(n_subcarriers), Idle{}) {
  if (n_users < 0 || n_subcarriers < 0) throw InvalidParameter("Allocation: negative dimension");
}

std::optional<int> Allocation::user_on(int n) const {
  for (int k = 0; k < n_users_; ++k)
    if (!std::holds_alternative<Idle>(at(k, n))) return k;
  return std::nullopt;
}

double Allocation::tx_power() const {
  double total = 0.0;
  for (const Entry& e : entries_) {
    if (const auto* d = std::get_if<Direct>(&e))
      total += d->p_d;
    else if (const auto* a = std::get_if<Af>(&e))
      total += a->p_bs + a->p_rn;
  }
  return total;
}

Allocation Allocation::scaled(double factor) const {
  Allocation out = *this;
  for (Entry& e : out.entries_) {
    if (auto* d = std::get_if<Direct>(&e)) {
      d->p_d *= factor;
    } else if (auto* a = std::get_if<Af>(&e)) {
      a->p_bs *= factor;
      a->p_rn *= factor;
    }
  }
  return out;
}

std::string to_string(Constraint c) {
  switch (c) {
    case Constraint::power_budget: return "total transmit power within budget";
    case Constraint::one_protocol_per_pair: return "one protocol per user-subcarrier pair";
    case Constraint::one_user_per_subcarrier: return "at most one user per subcarrier";
    case Constraint::nonnegative_power: return "non-negative powers";
    case Constraint::relay_available: return "AF entry requires a serving relay";
    case Constraint::dimensions: return "allocation dimensions";
  }
  return "unknown";
}

namespace {

// Structural checks shared by check_feasibility and the rate evaluation.
void structural_violations(const Allocation& alloc, const RadioConfig& cfg, std::vector<Violation>& out) {
  if (alloc.n_users() != cfg.n_users || alloc.n_subcarriers() != cfg.n_subcarriers) {
    out.push_back({Constraint::dimensions, -1, -1, "allocation is not n_users x n_subcarriers"});
    return;
  }
  for (int n = 0; n < alloc.n_subcarriers(); ++n) {
    int holders = 0;
    for (int k = 0; k < alloc.n_users(); ++k) {
      const Entry& e = alloc.at(k, n);
      if (std::holds_alternative<Idle>(e)) continue;
      ++holders;
      if (const auto* d = std::get_if<Direct>(&e)) {
        if (!(d->p_d >= 0.0))
          out.push_back({Constraint::nonnegative_power, k, n, "negative direct power"});
      } else if (const auto* a = std::get_if<Af>(&e)) {
        if (!(a->p_bs >= 0.0) || !(a->p_rn >= 0.0))
          out.push_back({Constraint::nonnegative_power, k, n, "negative AF power"});
        if (cfg.n_relays == 0)
          out.push_back({Constraint::relay_available, k, n, "AF entry with no relays deployed"});
      }
    }
    if (holders > 1)
      out.push_back({Constraint::one_user_per_subcarrier, -1, n,
                     std::to_string(holders) + " users share subcarrier " + std::to_string(n)});
  }
}

double entry_rate(const Entry& e, int k, int n, const ChannelRealization& chan, SnrMode mode) {
  if (const auto* d = std::get_if<Direct>(&e))
    return link_rate_direct(snr_direct(d->p_d, chan.g_bs_ue(k, n), chan.noise_gap));
  if (const auto* a = std::get_if<Af>(&e)) {
    const int m = chan.serving_relay.at(static_cast<std::size_t>(k));
    const double g1 = snr_direct(a->p_bs, chan.g_bs_rn(m, n), chan.noise_gap);
    const double g2 = snr_direct(a->p_rn, chan.g_rn_ue(k, n), chan.noise_gap);
    if (g1 + g2 <= 0.0) return 0.0;
    return link_rate_af(mode == SnrMode::exact ? snr_af_exact(g1, g2) : snr_af_approx(g1, g2));
  }
  return 0.0;
}

}  // namespace

double system_rate(const Allocation& alloc, const ChannelRealization& chan, const RadioConfig& cfg,
                   SnrMode mode) {
  std::vector<Violation> v;
  structural_violations(alloc, cfg, v);
  if (!v.empty()) throw InvalidParameter("system_rate: infeasible allocation: " + v.front().message);

  double total = 0.0;
  for (int k = 0; k < alloc.n_users(); ++k) {
    double user_rate = 0.0;
    for (int n = 0; n < alloc.n_subcarriers(); ++n) user_rate += entry_rate(alloc.at(k, n), k, n, chan, mode);
    total += cfg.weight(k) * user_rate;
  }
  return total;
}

double system_power(const Allocation& alloc, const PowerModel& pm, int n_relays) {
  double variable = 0.0;
  for (int n = 0; n < alloc.n_subcarriers(); ++n) {
    for (int k = 0; k < alloc.n_users(); ++k) {
      const Entry& e = alloc.at(k, n);
      if (const auto* d = std::get_if<Direct>(&e))
        variable += pm.xi_bs * d->p_d;
      else if (const auto* a = std::get_if<Af>(&e))
        variable += 0.5 * (pm.xi_bs * a->p_bs + pm.xi_rn * a->p_rn);
    }
  }
  return pm.fixed_power(n_relays) + variable;
}

double af_fraction(const Allocation& alloc) {
  if (alloc.n_subcarriers() == 0) return 0.0;
  int af = 0;
  for (int n = 0; n < alloc.n_subcarriers(); ++n) {
    for (int k = 0; k < alloc.n_users(); ++k) {
      if (std::holds_alternative<Af>(alloc.at(k, n))) {
        ++af;
        break;
      }
    }
  }
  return static_cast<double>(af) / alloc.n_subcarriers();
}

std::vector<Violation> check_feasibility(const Allocation& alloc, const RadioConfig& cfg, const PowerModel& pm) {
  std::vector<Violation> out;
  structural_violations(alloc, cfg, out);
  const double used = alloc.tx_power();
  if (used > pm.p_max * (1.0 + 1e-9))
    out.push_back({Constraint::power_budget, -1, -1,
                   "transmit power " + std::to_string(used) + " W exceeds p_max " + std::to_string(pm.p_max) + " W"});
  return out;
}

Metrics compute_metrics(const Allocation& alloc, const ChannelRealization& chan, const RadioConfig& cfg,
                        const PowerModel& pm, SnrMode mode) {
  Metrics m;
  m.rate_total = system_rate(alloc, chan, cfg, mode);
  m.rate_per_subcarrier = m.rate_total / cfg.n_subcarriers;
  m.power_total = system_power(alloc, pm, cfg.n_relays);
  m.ee = energy_efficiency(m.rate_total, m.power_total);
  m.ee_per_subcarrier = energy_efficiency(m.rate_per_subcarrier, m.power_total);
  m.rho = af_fraction(alloc);
  m.tx_power_used = alloc.tx_power();
  return m;
}

}  // namespace eerelay
