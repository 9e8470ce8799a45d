#include "eerelay/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eerelay {

namespace {

constexpr std::size_t kMaxAssignments = 1'000'000;
constexpr int kMaxActive = 3;

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> out(static_cast<std::size_t>(points));
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < points; ++i) out[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (points - 1));
  out.back() = hi;
  return out;
}

std::vector<double> linear_grid(double lo, double hi, int points) {
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  out.back() = hi;
  return out;
}

void insert_sorted(std::vector<double>& v, double x) {
  auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it == v.end() || *it != x) v.insert(it, x);
}

// One active subcarrier: its grids and the (rate, amplifier cost) table
// over power x split.
struct ActiveSlot {
  int subcarrier = 0;
  SlotChoice choice;
  double g1 = 0.0;  // direct: BS->UE gain; AF: BS->RN gain
  double g2 = 0.0;  // AF: RN->UE gain
  std::vector<double> powers;
  std::vector<double> betas;  // {1} for direct
  std::vector<double> rate;   // powers.size() x betas.size(), row-major
  std::vector<double> cost;

  // log10 span of the power bracket and linear span of the split bracket
  double power_span = 6.0;
  double beta_span = 1.0;

  void tabulate(double noise_gap, const PowerModel& pm) {
    const std::size_t nb = betas.size();
    rate.assign(powers.size() * nb, 0.0);
    cost.assign(powers.size() * nb, 0.0);
    for (std::size_t i = 0; i < powers.size(); ++i) {
      const double p = powers[i];
      for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t at = i * nb + b;
        if (choice.protocol == Protocol::direct) {
          rate[at] = link_rate_direct(snr_direct(p, g1, noise_gap));
          cost[at] = pm.xi_bs * p;
        } else {
          const double beta = betas[b];
          const double s1 = snr_direct(beta * p, g1, noise_gap);
          const double s2 = snr_direct((1.0 - beta) * p, g2, noise_gap);
          rate[at] = link_rate_af(snr_af_approx(s1, s2));
          cost[at] = 0.5 * (pm.xi_bs * beta * p + pm.xi_rn * (1.0 - beta) * p);
        }
      }
    }
  }
};

struct Pick {
  std::size_t power = 0;
  std::size_t beta = 0;
};

struct GridPoint {
  std::vector<Pick> picks;
  double rate = 0.0;
  double cost = 0.0;
};

// max sum(rate - q cost) subject to sum(power) <= p_max over the product grid.
GridPoint parametric_max(const std::vector<ActiveSlot>& slots, double q, double p_max) {
  const std::size_t n_slots = slots.size();
  GridPoint best;
  best.picks.resize(n_slots);
  if (n_slots == 0) return best;

  // Per slot and power level: the best split at this price.
  std::vector<std::vector<double>> value(n_slots);
  std::vector<std::vector<std::size_t>> split(n_slots);
  for (std::size_t j = 0; j < n_slots; ++j) {
    const auto& s = slots[j];
    const std::size_t nb = s.betas.size();
    value[j].assign(s.powers.size(), -std::numeric_limits<double>::infinity());
    split[j].assign(s.powers.size(), 0);
    for (std::size_t i = 0; i < s.powers.size(); ++i) {
      for (std::size_t b = 0; b < nb; ++b) {
        const double v = s.rate[i * nb + b] - q * s.cost[i * nb + b];
        if (v > value[j][i]) {
          value[j][i] = v;
          split[j][i] = b;
        }
      }
    }
  }

  // Prefix maxima of the last slot, indexed by power level (powers ascend).
  const auto& last = slots.back();
  std::vector<std::size_t> prefix_arg(last.powers.size());
  for (std::size_t i = 0; i < last.powers.size(); ++i)
    prefix_arg[i] = (i == 0 || value.back()[i] > value.back()[prefix_arg[i - 1]]) ? i : prefix_arg[i - 1];

  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx(n_slots - 1, 0);
  for (;;) {
    double used = 0.0;
    double partial = 0.0;
    for (std::size_t j = 0; j + 1 < n_slots; ++j) {
      used += slots[j].powers[idx[j]];
      partial += value[j][idx[j]];
    }
    const double remaining = p_max - used;
    auto it = std::upper_bound(last.powers.begin(), last.powers.end(), remaining);
    if (it != last.powers.begin()) {
      const std::size_t li = prefix_arg[static_cast<std::size_t>(it - last.powers.begin()) - 1];
      const double total = partial + value.back()[li];
      if (total > best_value) {
        best_value = total;
        for (std::size_t j = 0; j + 1 < n_slots; ++j) best.picks[j] = {idx[j], split[j][idx[j]]};
        best.picks.back() = {li, split.back()[li]};
      }
    }
    // odometer over all but the last slot
    std::size_t j = 0;
    while (j < idx.size()) {
      if (++idx[j] < slots[j].powers.size()) break;
      idx[j] = 0;
      ++j;
    }
    if (j == idx.size()) break;
  }

  if (best_value == -std::numeric_limits<double>::infinity()) {
    best.picks.clear();
    return best;
  }
  for (std::size_t j = 0; j < n_slots; ++j) {
    const auto& s = slots[j];
    const std::size_t at = best.picks[j].power * s.betas.size() + best.picks[j].beta;
    best.rate += s.rate[at];
    best.cost += s.cost[at];
  }
  return best;
}

// Exact maximiser over the finite product grid. For the EE objective the
// ratio is handled by Dinkelbach iterations on the finite set, which stop
// exactly at the grid optimum.
GridPoint grid_optimum(const std::vector<ActiveSlot>& slots, double p_max, double fixed_power,
                       GridObjective objective) {
  GridPoint point = parametric_max(slots, 0.0, p_max);
  if (objective == GridObjective::spectral_efficiency || point.picks.empty()) return point;

  double q = point.rate / (fixed_power + point.cost);
  for (int iter = 0; iter < 200; ++iter) {
    GridPoint next = parametric_max(slots, q, p_max);
    const double q_next = next.rate / (fixed_power + next.cost);
    if (!(q_next > q)) break;
    q = q_next;
    point = std::move(next);
  }
  return point;
}

void refine_around(ActiveSlot& s, const Pick& pick, double p_max, const GridSpec& grid) {
  const double p_star = s.powers[pick.power];
  s.power_span /= 10.0;
  double hi = std::min(std::log10(p_max), std::log10(p_star) + 0.5 * s.power_span);
  double lo = hi - s.power_span;
  s.powers = log_grid(std::pow(10.0, lo), std::pow(10.0, hi), grid.power_points);
  insert_sorted(s.powers, p_star);

  if (s.choice.protocol == Protocol::af) {
    const double b_star = s.betas[pick.beta];
    s.beta_span /= 10.0;
    const double b_lo = std::max(0.0, b_star - 0.5 * s.beta_span);
    const double b_hi = std::min(1.0, b_star + 0.5 * s.beta_span);
    s.betas = linear_grid(b_lo, b_hi, grid.beta_points);
    insert_sorted(s.betas, b_star);
  }
}

}  // namespace

void GridSpec::validate() const {
  if (power_points < 2 || beta_points < 2) throw InvalidParameter("GridSpec: grid sizes must be at least 2");
  if (refine_rounds < 0) throw InvalidParameter("GridSpec: refine_rounds must be non-negative");
}

std::size_t count_assignments(int n_users, int n_subcarriers, int n_relays) {
  const std::size_t options = 1 + static_cast<std::size_t>(n_users) * (n_relays > 0 ? 2 : 1);
  std::size_t total = 1;
  for (int n = 0; n < n_subcarriers; ++n) {
    total *= options;
    if (total > kMaxAssignments)
      throw InstanceTooLarge("brute force: more than 10^6 assignments (" + std::to_string(options) + "^" +
                             std::to_string(n_subcarriers) + ")");
  }
  return total;
}

void for_each_assignment(int n_users, int n_subcarriers, int n_relays,
                         const std::function<void(const Assignment&)>& visit) {
  count_assignments(n_users, n_subcarriers, n_relays);

  std::vector<SlotChoice> options{SlotChoice{}};
  for (int k = 0; k < n_users; ++k) {
    options.push_back({k, Protocol::direct});
    if (n_relays > 0) options.push_back({k, Protocol::af});
  }

  std::vector<std::size_t> digit(static_cast<std::size_t>(n_subcarriers), 0);
  Assignment a(static_cast<std::size_t>(n_subcarriers));
  for (;;) {
    for (std::size_t n = 0; n < digit.size(); ++n) a[n] = options[digit[n]];
    visit(a);
    // the last subcarrier varies fastest, giving lexicographic order
    std::size_t n = digit.size();
    while (n > 0) {
      if (++digit[n - 1] < options.size()) break;
      digit[n - 1] = 0;
      --n;
    }
    if (n == 0) break;
  }
}

std::vector<Assignment> enumerate_assignments(int n_users, int n_subcarriers, int n_relays) {
  std::vector<Assignment> out;
  out.reserve(count_assignments(n_users, n_subcarriers, n_relays));
  for_each_assignment(n_users, n_subcarriers, n_relays, [&](const Assignment& a) { out.push_back(a); });
  return out;
}

GridOptimum optimize_powers_on_grid(const Assignment& assignment, const ChannelRealization& chan,
                                    const Scenario& sc, const GridSpec& grid, GridObjective objective) {
  grid.validate();
  const PowerModel& pm = sc.power;
  const double fixed = pm.fixed_power(sc.radio.n_relays);

  std::vector<ActiveSlot> slots;
  for (std::size_t n = 0; n < assignment.size(); ++n) {
    const SlotChoice& c = assignment[n];
    if (c.idle()) continue;
    ActiveSlot s;
    s.subcarrier = static_cast<int>(n);
    s.choice = c;
    if (c.protocol == Protocol::direct) {
      s.g1 = chan.g_bs_ue(c.user, s.subcarrier);
      s.betas = {1.0};
    } else {
      if (!chan.has_relays()) throw InvalidParameter("optimize_powers_on_grid: AF slot without relays");
      s.g1 = chan.g_bs_rn(chan.serving_relay[static_cast<std::size_t>(c.user)], s.subcarrier);
      s.g2 = chan.g_rn_ue(c.user, s.subcarrier);
      s.betas = linear_grid(0.0, 1.0, grid.beta_points);
    }
    s.powers = log_grid(pm.p_max * 1e-6, pm.p_max, grid.power_points);
    slots.push_back(std::move(s));
  }
  if (static_cast<int>(slots.size()) > kMaxActive)
    throw InstanceTooLarge("optimize_powers_on_grid: more than three active subcarriers");

  GridPoint point;
  for (int round = 0; round <= grid.refine_rounds; ++round) {
    for (auto& s : slots) s.tabulate(chan.noise_gap, pm);
    GridPoint candidate = grid_optimum(slots, pm.p_max, fixed, objective);
    point = std::move(candidate);
    if (point.picks.empty() || round == grid.refine_rounds) break;
    for (std::size_t j = 0; j < slots.size(); ++j) refine_around(slots[j], point.picks[j], pm.p_max, grid);
  }

  GridOptimum out;
  out.allocation = Allocation(chan.n_users(), chan.n_subcarriers());
  for (std::size_t j = 0; j < slots.size() && !point.picks.empty(); ++j) {
    const auto& s = slots[j];
    const double p = s.powers[point.picks[j].power];
    if (s.choice.protocol == Protocol::direct) {
      out.allocation.at(s.choice.user, s.subcarrier) = Direct{p};
    } else {
      const double beta = s.betas[point.picks[j].beta];
      out.allocation.at(s.choice.user, s.subcarrier) = Af{beta * p, (1.0 - beta) * p};
    }
  }
  out.rate = system_rate(out.allocation, chan, sc.radio);
  out.power = system_power(out.allocation, pm, sc.radio.n_relays);
  out.ee = energy_efficiency(out.rate, out.power);
  return out;
}

Assignment assignment_of(const Allocation& alloc) {
  Assignment a(static_cast<std::size_t>(alloc.n_subcarriers()));
  for (int n = 0; n < alloc.n_subcarriers(); ++n) {
    for (int k = 0; k < alloc.n_users(); ++k) {
      const Entry& e = alloc.at(k, n);
      if (std::holds_alternative<Direct>(e)) {
        a[static_cast<std::size_t>(n)] = {k, Protocol::direct};
        break;
      }
      if (std::holds_alternative<Af>(e)) {
        a[static_cast<std::size_t>(n)] = {k, Protocol::af};
        break;
      }
    }
  }
  return a;
}

OracleResult brute_force_eem(const ChannelRealization& chan, const Scenario& sc, const GridSpec& grid) {
  if (chan.n_subcarriers() > kMaxActive)
    throw InstanceTooLarge("brute_force_eem: at most three subcarriers are supported");

  OracleResult result;
  std::optional<GridOptimum> best_ee;
  std::optional<GridOptimum> best_se;
  for_each_assignment(chan.n_users(), chan.n_subcarriers(), chan.n_relays(), [&](const Assignment& a) {
    ++result.assignments_searched;
    GridOptimum ee = optimize_powers_on_grid(a, chan, sc, grid, GridObjective::energy_efficiency);
    if (!best_ee || ee.ee > best_ee->ee) {
      best_ee = std::move(ee);
      result.eem_assignment = a;
    }
    GridOptimum se = optimize_powers_on_grid(a, chan, sc, grid, GridObjective::spectral_efficiency);
    if (!best_se || se.rate > best_se->rate) {
      best_se = std::move(se);
      result.sem_assignment = a;
    }
  });

  auto to_solution = [&](GridOptimum g) {
    Solution s;
    s.metrics = compute_metrics(g.allocation, chan, sc.radio, sc.power);
    s.allocation = std::move(g.allocation);
    return s;
  };
  result.eem = to_solution(std::move(*best_ee));
  result.sem = to_solution(std::move(*best_se));
  return result;
}

}  // namespace eerelay
