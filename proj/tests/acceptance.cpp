// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "eerelay/experiments.hpp"
#include "eerelay/oracle.hpp"

using namespace eerelay;

namespace {

constexpr double kLn2 = std::numbers::ln2;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %d %s\n", ok ? "PASS" : "FAIL", id, name);
  if (!detail.empty()) std::printf("       %s\n", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SystemConfig config(int k, int n, int m, double p_max_dbm = 0.0) {
  SystemConfig c;
  c.set("n_users", std::to_string(k));
  c.set("n_subcarriers", std::to_string(n));
  c.set("n_relays", std::to_string(m));
  c.set("p_max_dbm", std::to_string(p_max_dbm));
  c.validate();
  return c;
}

ChannelRealization channel(const SystemConfig& c, std::uint64_t seed) {
  const Topology t = build_topology(c.radio.n_users, c.radio.n_relays, c.geometry, seed);
  return sample_channel(t, c.radio.n_subcarriers, c.radio, c.pathloss, seed);
}

// Split of the AF power in the quotient form, 1/2 where it reads 0/0.
double beta_quotient(double g1, double g2, double a, double b) {
  const double den = g1 * a - g2 * b;
  if (den == 0.0) return 0.5;
  return (-g2 * b + std::sqrt(g1 * g2 * a * b)) / den;
}

// ---- per-subcarrier Lagrangian terms, written out from the closed forms

struct Term {
  double value = 0.0;  // rate minus priced power at the water-filled optimum
  double power = 0.0;
};

Term direct_term(double q, double lambda, double alpha, double xi_b) {
  const double price = q * xi_b + lambda;
  const double p = std::max(0.0, 1.0 / (kLn2 * price) - 1.0 / alpha);
  return {std::log2(1.0 + alpha * p) - price * p, p};
}

Term af_term(double q, double lambda, double g1, double g2, double noise, double xi_b, double xi_r) {
  const double a = q * xi_b + 2.0 * lambda, b = q * xi_r + 2.0 * lambda;
  double beta = beta_quotient(g1, g2, a, b);
  if (!(beta > 0.0 && beta < 1.0)) beta = std::sqrt(g2 * b) / (std::sqrt(g1 * a) + std::sqrt(g2 * b));
  const double alpha = beta * (1.0 - beta) * g1 * g2 / ((beta * g1 + (1.0 - beta) * g2) * noise);
  const double price = beta * a + (1.0 - beta) * b;
  const double p = std::max(0.0, 1.0 / (kLn2 * price) - 1.0 / alpha);
  return {0.5 * (std::log2(1.0 + alpha * p) - price * p), p};
}

struct KktReport {
  double worst_stationarity = 0.0;
  long subcarriers = 0;
  long dominated = 0;
};

void check_kkt(const Solution& s, const ChannelRealization& chan, const PowerModel& pm, KktReport& out) {
  const double q = s.q, lambda = s.lambda;
  const double noise = chan.noise_gap;
  for (int n = 0; n < chan.n_subcarriers(); ++n) {
    ++out.subcarriers;
    double winner_value = 0.0;  // idle
    double best_other = 0.0;
    const auto holder = s.allocation.user_on(n);
    for (int k = 0; k < chan.n_users(); ++k) {
      const Entry& e = s.allocation.at(k, n);
      const Term d = direct_term(q, lambda, chan.g_bs_ue(k, n) / noise, pm.xi_bs);
      if (holder == k && std::holds_alternative<Direct>(e)) {
        winner_value = d.value;
        const double p = std::get<Direct>(e).p_d;
        if (p > 0.0) {
          const double alpha = chan.g_bs_ue(k, n) / noise;
          const double price = q * pm.xi_bs + lambda;
          out.worst_stationarity =
              std::max(out.worst_stationarity, std::abs(alpha / (kLn2 * (1.0 + alpha * p)) - price) / price);
        }
      } else {
        best_other = std::max(best_other, d.value);
      }
      if (!chan.has_relays()) continue;
      const int m = chan.serving_relay[static_cast<std::size_t>(k)];
      const double g1 = chan.g_bs_rn(m, n), g2 = chan.g_rn_ue(k, n);
      const Term a = af_term(q, lambda, g1, g2, noise, pm.xi_bs, pm.xi_rn);
      if (holder == k && std::holds_alternative<Af>(e)) {
        winner_value = a.value;
        const Af& af = std::get<Af>(e);
        const double p = af.p_bs + af.p_rn;
        if (p > 0.0) {
          // stationarity in the total power at the chosen split, and in the split itself
          const double beta = af.p_bs / p;
          const double ab = q * pm.xi_bs + 2.0 * lambda, bb = q * pm.xi_rn + 2.0 * lambda;
          const double alpha = beta * (1.0 - beta) * g1 * g2 / ((beta * g1 + (1.0 - beta) * g2) * noise);
          const double price = beta * ab + (1.0 - beta) * bb;
          const double r_power = std::abs(alpha / (kLn2 * (1.0 + alpha * p)) - price) / price;
          const double beta_ref = beta_quotient(g1, g2, ab, bb);
          const double r_split = std::abs(beta - beta_ref) / beta_ref;
          out.worst_stationarity = std::max({out.worst_stationarity, r_power, r_split});
        }
      } else {
        best_other = std::max(best_other, a.value);
      }
    }
    if (winner_value < best_other - 1e-12 * std::max(1.0, std::abs(best_other))) ++out.dominated;
  }
}

// Spearman rank correlation of `y` against its index (x strictly increasing).
double spearman_vs_index(const std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && y[order[j + 1]] == y[order[i]]) ++j;
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = 0.5 * static_cast<double>(i + j) + 1.0;
    i = j + 1;
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) mx += static_cast<double>(i + 1), my += rank[i];
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i + 1) - mx, dy = rank[i] - my;
    sxy += dx * dy, sxx += dx * dx, syy += dy * dy;
  }
  return syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
}

// ---- criteria

void oracle_certification() {
  const auto t0 = Clock::now();
  const SystemConfig c = config(2, 2, 1, 0.0);
  double worst = INFINITY;
  int below = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto chan = channel(c, seed);
    const double solver = solve_eem(chan, c.scenario(), c.solver).metrics.ee;
    const double oracle = brute_force_eem(chan, c.scenario()).eem.metrics.ee;
    const double gap = (solver - oracle) / oracle;
    worst = std::min(worst, gap);
    if (solver < oracle * (1.0 - 0.01)) ++below;
  }
  const double secs = seconds_since(t0);
  report(1, "oracle certification (K=2, N=2, M=1, 0 dBm, 20 seeds)", below == 0 && secs <= 60.0,
         fmt("worst relative gap %+.3e (floor -1e-2), %d seeds below, %.1f s (limit 60 s)", worst, below, secs));
}

void invariants_and_kkt() {
  const SystemConfig c = config(8, 16, 2, 0.0);
  int monotone_fail = 0, residual_fail = 0, converged = 0;
  double worst_drop = 0.0, worst_f = 0.0;
  KktReport kkt;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto chan = channel(c, seed);
    const Solution s = solve_eem(chan, c.scenario(), c.solver);
    const auto& q = s.trace.q_sequence;
    bool mono = true;
    for (std::size_t i = 1; i < q.size(); ++i) {
      worst_drop = std::max(worst_drop, q[i - 1] - q[i]);
      if (q[i] < q[i - 1] - 1e-12) mono = false;
    }
    if (!mono) ++monotone_fail;
    const double f = std::abs(s.trace.f_residual) / s.metrics.power_total;
    worst_f = std::max(worst_f, f);
    if (f > 1e-6) ++residual_fail;
    const bool ok = s.trace.termination == Termination::converged && s.trace.outer_iterations() <= 10;
    if (ok) {
      ++converged;
      check_kkt(s, chan, c.power, kkt);
    }
  }
  report(2, "Dinkelbach invariants (K=8, N=16, M=2, 100 seeds)",
         monotone_fail == 0 && residual_fail == 0 && converged >= 99,
         fmt("q drops: %d (worst %.2e, slack 1e-12); |F|/P_T > 1e-6: %d (worst %.2e); converged within 10: %d/100",
             monotone_fail, worst_drop, residual_fail, worst_f, converged));
  report(3, "KKT residuals and winner dominance", kkt.worst_stationarity <= 1e-6 && kkt.dominated == 0,
         fmt("worst stationarity residual %.2e (limit 1e-6); dominance violated on %ld of %ld subcarriers",
             kkt.worst_stationarity, kkt.dominated, kkt.subcarriers));
}

void ordering_and_threshold() {
  SweepSpec s;
  s.name = "budget";
  s.base = config(8, 32, 3, 0.0);
  std::vector<double> budgets{-30.0};
  for (int dbm = -10; dbm <= 60; dbm += 5) budgets.push_back(dbm);
  s.axes = {{"p_max_dbm", budgets}};
  s.samples = 200;
  const SweepResult r = run_sweep(s, {0, true});

  // records alternate EEM, SEM per grid point
  long order_fail = 0, pairs = 0;
  double worst_ee = 0.0, worst_se = 0.0, tiny_gap = 0.0;
  std::vector<double> eem_ee;
  for (std::size_t i = 0; i + 1 < r.records.size(); i += 2) {
    const auto& e = r.samples[i];
    const auto& m = r.samples[i + 1];
    for (std::size_t j = 0; j < e.size(); ++j) {
      if (e[j].failed || m[j].failed) continue;
      ++pairs;
      const double d_ee = m[j].metrics.ee - e[j].metrics.ee;  // SEM above EEM is a violation
      const double d_se = e[j].metrics.rate_per_subcarrier - m[j].metrics.rate_per_subcarrier;
      worst_ee = std::max(worst_ee, d_ee);
      worst_se = std::max(worst_se, d_se);
      if (d_ee > 1e-9 * std::min(1.0, m[j].metrics.ee) || d_se > 1e-9 * std::min(1.0, m[j].metrics.rate_per_subcarrier))
        ++order_fail;
      if (r.records[i].p_max_dbm == -30.0) {
        tiny_gap = std::max(tiny_gap, std::abs(e[j].metrics.ee - m[j].metrics.ee) / m[j].metrics.ee);
        tiny_gap = std::max(tiny_gap, std::abs(e[j].metrics.rate_total - m[j].metrics.rate_total) / m[j].metrics.rate_total);
      }
    }
    if (r.records[i].p_max_dbm >= -10.0) eem_ee.push_back(r.records[i].ee.mean);
  }
  bool monotone = true;
  for (std::size_t i = 1; i < eem_ee.size(); ++i) monotone = monotone && eem_ee[i] >= eem_ee[i - 1];
  const double last = eem_ee.back(), prev = eem_ee[eem_ee.size() - 2];
  const double saturation = std::abs(last - prev) / prev;
  report(4, "EEM/SEM ordering and budget threshold (K=8, N=32, M=3, 200 samples)",
         order_fail == 0 && tiny_gap <= 1e-3 && monotone && saturation < 1e-3,
         fmt("ordering violations %ld of %ld (worst EE %.1e, SE %.1e); -30 dBm max rel. diff %.2e (limit 1e-3); "
             "EE over -10..60 dBm %s, last step %.2e (limit 1e-3)",
             order_fail, pairs, worst_ee, worst_se, tiny_gap, monotone ? "non-decreasing" : "DECREASES", saturation));
}

void radius_trend() {
  SweepSpec s;
  s.name = "radius";
  s.base = config(8, 32, 3, 0.0);
  s.axes = {{"n_relays", {0, 3}}, {"cell_radius_km", {0.75, 1.0, 1.5, 2.0}}};
  s.samples = 200;
  const SweepResult r = run_sweep(s);
  std::vector<double> rho_eem, rho_sem, ee0, ee3;
  for (const auto& rec : r.records) {
    if (rec.n_relays == 3) (rec.algorithm == Algorithm::eem ? rho_eem : rho_sem).push_back(rec.rho.mean);
    if (rec.algorithm != Algorithm::eem) continue;
    (rec.n_relays == 0 ? ee0 : ee3).push_back(rec.ee.mean);
  }
  const double s_eem = spearman_vs_index(rho_eem), s_sem = spearman_vs_index(rho_sem);
  bool below = true;
  for (std::size_t i = 0; i < ee0.size(); ++i) below = below && ee3[i] < ee0[i];
  std::string rho_text;
  for (std::size_t i = 0; i < rho_eem.size(); ++i) rho_text += fmt("%s%.4f/%.4f", i ? " " : "", rho_eem[i], rho_sem[i]);
  report(5, "relaying versus cell size (K=8, N=32, M in {0,3}, radius 0.75..2 km, 200 samples)",
         s_eem >= 0.9 && s_sem >= 0.9 && below,
         fmt("mean rho EEM/SEM by radius: %s; Spearman EEM %.2f, SEM %.2f (need >= 0.9); EE with M=3 below M=0 at every "
             "radius: %s",
             rho_text.c_str(), s_eem, s_sem, below ? "yes" : "no"));
}

void placement_trend() {
  const auto t0 = Clock::now();
  SweepSpec s;
  s.name = "d_r";
  s.base = config(8, 32, 3, 0.0);
  s.base.set("cell_radius_km", "1.5");
  s.axes = {{"d_r", {0.1, 0.3, 0.5, 0.7, 0.9}}};
  s.samples = 200;
  s.algorithms = {Algorithm::eem};
  const SweepResult r = run_sweep(s);
  const auto best = std::max_element(r.records.begin(), r.records.end(),
                                     [](const ResultRecord& a, const ResultRecord& b) { return a.ee.mean < b.ee.mean; });
  std::string text;
  for (const auto& rec : r.records) text += fmt("%s%.1f:%.5g", text.empty() ? "" : " ", rec.d_r, rec.ee.mean);
  const double secs = seconds_since(t0);
  report(6, "relay placement (M=3, radius 1.5 km, 0 dBm, 200 samples)", best->d_r <= 0.5 && secs <= 600.0,
         fmt("mean EE per subcarrier by D_r: %s; argmax %.1f (need <= 0.5); %.1f s (limit 600 s)", text.c_str(),
             best->d_r, secs));
}

void beta_equivalence() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int compared = 0;
  for (int i = 0; i < 10000; ++i) {
    const double q = 5.0 * u(rng), lambda = std::pow(10.0, 4.0 * u(rng) - 2.0);
    const double g1 = std::pow(10.0, 8.0 * u(rng) - 4.0), g2 = std::pow(10.0, 8.0 * u(rng) - 4.0);
    const double xb = 1.0 + 9.0 * u(rng), xr = 1.0 + 9.0 * u(rng);
    const double a = q * xb + 2.0 * lambda, b = q * xr + 2.0 * lambda;
    if (g1 * a - g2 * b == 0.0) continue;
    const double ref = beta_quotient(g1, g2, a, b);
    worst = std::max(worst, std::abs(af_beta(q, lambda, g1, g2, xb, xr) - ref) / ref);
    ++compared;
  }
  int symmetric_bad = 0;
  for (int i = 0; i < 10000; ++i) {
    const double q = 5.0 * u(rng), lambda = std::pow(10.0, 4.0 * u(rng) - 2.0);
    const double g = std::pow(10.0, 8.0 * u(rng) - 4.0), xi = 1.0 + 9.0 * u(rng);
    if (af_beta(q, lambda, g, g, xi, xi) != 0.5) ++symmetric_bad;
  }
  report(7, "beta equivalence and degeneracy (1e4 tuples)", worst <= 1e-9 && symmetric_bad == 0,
         fmt("worst relative difference to the quotient form %.2e over %d tuples (limit 1e-9); symmetric inputs not 0.5: %d",
             worst, compared, symmetric_bad));
}

void model_checks() {
  const PowerModel pm;
  Allocation idle(2, 2);
  Allocation direct(1, 1);
  direct.at(0, 0) = Direct{1.0};
  Allocation af(1, 1);
  af.at(0, 0) = Af{2.0, 2.0};
  const double p1 = system_power(idle, pm, 3), p2 = system_power(direct, pm, 0), p3 = system_power(af, pm, 1);
  const bool power_ok = p1 == 120.0 && p2 == 62.6 && p3 == 87.6;

  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  long strict_fail = 0;
  for (int i = 0; i < 100000; ++i) {
    const double g1 = std::pow(10.0, u(rng)), g2 = std::pow(10.0, u(rng));
    if (!(snr_af_exact(g1, g2) < snr_af_approx(g1, g2))) ++strict_fail;
  }
  const bool degenerate_equal = snr_af_exact(0.0, 5.0) == snr_af_approx(0.0, 5.0) &&
                                snr_af_exact(5.0, 0.0) == snr_af_approx(5.0, 0.0);
  report(8, "model unit checks", power_ok && strict_fail == 0 && degenerate_equal,
         fmt("system_power %.17g / %.17g / %.17g (want 120 / 62.6 / 87.6); exact >= approx on %ld of 1e5 pairs; "
             "equal at a dead hop: %s",
             p1, p2, p3, strict_fail, degenerate_equal ? "yes" : "no"));
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  oracle_certification();
  invariants_and_kkt();
  ordering_and_threshold();
  radius_trend();
  placement_trend();
  beta_equivalence();
  model_checks();
  std::printf("%d of 8 criteria failed (%.1f s)\n", failures, seconds_since(t0));
  return failures;
}
