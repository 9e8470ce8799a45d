#include "eerelay/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace eerelay {

namespace {

constexpr double kLn2 = std::numbers::ln2;

// log2(1 + x) - x / (ln2 (1 + x)), the Lagrangian gain of a water-filled
// subcarrier at SNR x. Non-negative; zero at x = 0.
double marginal_gain(double x) {
  if (!(x > 0.0)) return 0.0;
  return std::max(0.0, (std::log1p(x) - x / (1.0 + x)) / kLn2);
}

void check_prices(double q, double lambda, const char* who) {
  if (!(q >= 0.0) || !(lambda >= 0.0)) throw InvalidParameter(std::string(who) + ": q and lambda must be non-negative");
  if (q == 0.0 && lambda == 0.0)
    throw InvalidParameter(std::string(who) + ": q = lambda = 0 leaves the water level unbounded");
}

// Winner of one subcarrier, or none when the subcarrier stays idle.
struct Slot {
  std::optional<Candidate> winner;
};

struct Sweep {
  std::vector<Slot> slots;
  double lambda = 0.0;
  double tx_power = 0.0;
  double rate = 0.0;
  double variable_power = 0.0;  // amplifier-weighted, before the fixed term
};

class DualEvaluator {
public:
  DualEvaluator(double q, const ChannelRealization& chan, const Scenario& sc, const SolverParams& params)
      : q_(q), chan_(chan), sc_(sc), params_(params), rng_(params.tie_seed ^ (chan.seed * 0x9E3779B97F4A7C15ULL)) {}

  Sweep evaluate(double lambda) {
    ++evaluations_;
    Sweep s;
    s.lambda = lambda;
    s.slots.resize(static_cast<std::size_t>(chan_.n_subcarriers()));
    for (int n = 0; n < chan_.n_subcarriers(); ++n) {
      const auto candidates = subcarrier_candidates(q_, lambda, n, chan_, sc_.power);
      const auto idx = assign_subcarriers(candidates, params_.tie_break, &rng_);
      if (!idx) continue;
      const Candidate& c = candidates[*idx];
      if (!(c.total_power() > 0.0)) continue;  // zero-power winner: leave idle
      add(s, n, c);
    }
    return s;
  }

  double objective(const Sweep& s) const {
    return s.rate - q_ * (sc_.power.fixed_power(sc_.radio.n_relays) + s.variable_power);
  }

  Sweep idle(double lambda) const {
    Sweep s;
    s.lambda = lambda;
    s.slots.resize(static_cast<std::size_t>(chan_.n_subcarriers()));
    return s;
  }

  Allocation to_allocation(const Sweep& s) const {
    Allocation alloc(chan_.n_users(), chan_.n_subcarriers());
    for (int n = 0; n < chan_.n_subcarriers(); ++n) {
      const auto& w = s.slots[static_cast<std::size_t>(n)].winner;
      if (!w) continue;
      if (w->protocol == Protocol::direct)
        alloc.at(w->user, n) = Direct{w->p_d};
      else
        alloc.at(w->user, n) = Af{w->p_bs, w->p_rn};
    }
    return alloc;
  }

  // Re-solves only the winners of `pattern` at a new multiplier; the power
  // map of a fixed assignment is continuous in lambda.
  double fixed_tx_power(double lambda, const Sweep& pattern) const {
    double total = 0.0;
    for (int n = 0; n < chan_.n_subcarriers(); ++n) {
      const auto& w = pattern.slots[static_cast<std::size_t>(n)].winner;
      if (w) total += candidate_for(*w, n, lambda).total_power();
    }
    return total;
  }

  Sweep evaluate_fixed(double lambda, const Sweep& pattern) const {
    Sweep s = idle(lambda);
    for (int n = 0; n < chan_.n_subcarriers(); ++n) {
      const auto& w = pattern.slots[static_cast<std::size_t>(n)].winner;
      if (!w) continue;
      Candidate c = candidate_for(*w, n, lambda);
      c.user = w->user;
      if (!(c.total_power() > 0.0)) continue;
      add(s, n, c);
    }
    return s;
  }

  double price() const { return q_; }

  int evaluations() const { return evaluations_; }

private:
  void add(Sweep& s, int n, const Candidate& c) const {
    s.slots[static_cast<std::size_t>(n)].winner = c;
    s.tx_power += c.total_power();
    const double x = c.effective_gain * c.total_power();
    if (c.protocol == Protocol::direct) {
      s.rate += std::log2(1.0 + x);
      s.variable_power += sc_.power.xi_bs * c.p_d;
    } else {
      s.rate += 0.5 * std::log2(1.0 + x);
      s.variable_power += 0.5 * (sc_.power.xi_bs * c.p_bs + sc_.power.xi_rn * c.p_rn);
    }
  }

  Candidate candidate_for(const Candidate& like, int n, double lambda) const {
    const int k = like.user;
    if (like.protocol == Protocol::direct)
      return direct_candidate(q_, lambda, chan_.g_bs_ue(k, n), chan_.noise_gap, sc_.power.xi_bs);
    const int m = chan_.serving_relay[static_cast<std::size_t>(k)];
    return af_candidate(q_, lambda, chan_.g_bs_rn(m, n), chan_.g_rn_ue(k, n), chan_.noise_gap, sc_.power.xi_bs,
                        sc_.power.xi_rn);
  }

  double q_;
  const ChannelRealization& chan_;
  const Scenario& sc_;
  const SolverParams& params_;
  std::mt19937_64 rng_;
  int evaluations_ = 0;
};

InnerResult finish(const DualEvaluator& ev, const Sweep& s, bool hit_limit) {
  InnerResult r;
  r.allocation = ev.to_allocation(s);
  r.lambda = s.lambda;
  r.iterations = ev.evaluations();
  r.hit_limit = hit_limit;
  r.tx_power = s.tx_power;
  return r;
}

// Spends the slack left by `upper`: the assignment of `upper` is held fixed
// and lambda lowered until the budget is met to rounding. When the budget
// sits inside a jump of the power map this trades winner dominance on the
// switching subcarriers for a strictly better objective.
std::optional<Sweep> meet_budget(const DualEvaluator& ev, const Sweep& upper, double lo, double p_max) {
  double a = lo > 0.0 || ev.price() > 0.0 ? lo : 1e-12 * upper.lambda;
  double b = upper.lambda;
  if (!(a < b)) return std::nullopt;
  // The jump may come from another assignment; walk down until this one
  // alone exceeds the budget (or, with q > 0, fits even at lambda = 0).
  for (int i = 0; ev.fixed_tx_power(a, upper) <= p_max; ++i) {
    b = a;
    if (a == 0.0 || i == 200) return ev.evaluate_fixed(b, upper);
    a = ev.price() > 0.0 && a < 1e-300 ? 0.0 : 0.5 * a;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    if (ev.fixed_tx_power(mid, upper) <= p_max)
      b = mid;
    else
      a = mid;
  }
  if (b >= upper.lambda) return std::nullopt;
  Sweep s = ev.evaluate_fixed(b, upper);
  if (s.tx_power > p_max || ev.objective(s) < ev.objective(upper)) return std::nullopt;
  return s;
}

// Bisection on the non-increasing map lambda -> total transmit power.
InnerResult inner_bisection(DualEvaluator& ev, double q, double p_max, const SolverParams& params) {
  if (q > 0.0) {
    Sweep free = ev.evaluate(0.0);
    if (free.tx_power <= p_max) return finish(ev, free, false);
  }

  double lo = 0.0;
  double hi = params.lambda_init;
  Sweep upper = ev.evaluate(hi);
  while (upper.tx_power > p_max) {
    if (ev.evaluations() >= params.i_inner_max) return finish(ev, ev.idle(hi), true);
    lo = hi;
    hi *= 2.0;
    upper = ev.evaluate(hi);
  }

  bool hit_limit = false;
  for (;;) {
    if (p_max - upper.tx_power <= 1e-6 * p_max) break;
    // The budget falls inside a jump of the power map; keep the feasible side.
    if (hi - lo <= params.eps_inner * hi) break;
    if (ev.evaluations() >= params.i_inner_max) {
      hit_limit = true;
      break;
    }
    const double mid = 0.5 * (lo + hi);
    Sweep s = ev.evaluate(mid);
    if (s.tx_power <= p_max) {
      hi = mid;
      upper = std::move(s);
    } else {
      lo = mid;
    }
  }
  if (params.fill_budget && !hit_limit && upper.tx_power < p_max) {
    if (auto exact = meet_budget(ev, upper, lo, p_max)) upper = std::move(*exact);
  }
  return finish(ev, upper, hit_limit);
}

InnerResult inner_subgradient(DualEvaluator& ev, double q, double p_max, const SolverParams& params) {
  const double step = params.step_for(p_max);
  // With q = 0 the projection may not reach zero or the water level diverges.
  const double floor = q > 0.0 ? 0.0 : params.eps_inner;

  double lambda = std::max(params.lambda_init, floor);
  std::optional<Sweep> best;
  double best_value = -std::numeric_limits<double>::infinity();

  for (int i = 0; i < params.i_inner_max; ++i) {
    Sweep s = ev.evaluate(lambda);
    const bool feasible = s.tx_power <= p_max * (1.0 + 1e-9);
    const double next = std::max(update_lambda_subgradient(lambda, step, p_max, s.tx_power), floor);
    if (feasible) {
      const double value = ev.objective(s);
      if (value > best_value) {
        best_value = value;
        best = s;
      }
    }
    if (std::abs(next - lambda) <= params.eps_inner) {
      if (feasible) return finish(ev, s, false);
      return finish(ev, best ? *best : ev.idle(lambda), false);
    }
    lambda = next;
  }
  return finish(ev, best ? *best : ev.idle(lambda), true);
}

void require_unit_weights(const RadioConfig& radio) {
  for (double w : radio.weights)
    if (w != 1.0) throw InvalidParameter("solver: only unit user weights are supported");
}

}  // namespace

const char* to_string(LambdaMode m) { return m == LambdaMode::bisection ? "bisection" : "subgradient"; }
const char* to_string(TieBreak t) { return t == TieBreak::lowest_index ? "lowest-index" : "seeded-random"; }
const char* to_string(Protocol p) { return p == Protocol::direct ? "direct" : "af"; }

const char* to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::outer_limit: return "outer-limit";
    case Termination::inner_limit: return "inner-limit";
  }
  return "unknown";
}

void SolverParams::validate() const {
  if (i_outer_max < 1) throw InvalidParameter("i_outer_max must be at least 1");
  if (i_inner_max < 1) throw InvalidParameter("i_inner_max must be at least 1");
  if (!(eps_outer > 0.0)) throw InvalidParameter("eps_outer must be positive");
  if (!(eps_inner > 0.0)) throw InvalidParameter("eps_inner must be positive");
  if (!(lambda_init > 0.0)) throw InvalidParameter("lambda_init must be positive");
  if (lambda_step && !(*lambda_step > 0.0)) throw InvalidParameter("lambda_step must be positive");
}

Candidate direct_candidate(double q, double lambda, double gain, double noise_gap, double xi_bs) {
  check_prices(q, lambda, "direct_candidate");
  if (!(gain >= 0.0)) throw InvalidParameter("direct_candidate: gain must be non-negative");
  if (!(noise_gap > 0.0)) throw InvalidParameter("direct_candidate: noise_gap must be positive");

  Candidate c;
  c.protocol = Protocol::direct;
  c.effective_gain = gain / noise_gap;
  if (c.effective_gain > 0.0) {
    const double level = 1.0 / (kLn2 * (q * xi_bs + lambda));
    c.p_d = std::max(0.0, level - 1.0 / c.effective_gain);
  }
  c.marginal = marginal_gain(c.effective_gain * c.p_d);
  return c;
}

double af_beta(double q, double lambda, double g1, double g2, double xi_bs, double xi_rn) {
  check_prices(q, lambda, "af_beta");
  if (!(g1 > 0.0) || !(g2 > 0.0)) throw InvalidParameter("af_beta: hop gains must be positive");
  const double a = q * xi_bs + 2.0 * lambda;
  const double b = q * xi_rn + 2.0 * lambda;
  const double first = std::sqrt(g1 * a);
  const double second = std::sqrt(g2 * b);
  return second / (first + second);
}

Candidate af_candidate(double q, double lambda, double g1, double g2, double noise_gap, double xi_bs,
                       double xi_rn) {
  const double beta = af_beta(q, lambda, g1, g2, xi_bs, xi_rn);
  if (!(noise_gap > 0.0)) throw InvalidParameter("af_candidate: noise_gap must be positive");

  Candidate c;
  c.protocol = Protocol::af;
  c.beta = beta;
  c.effective_gain = beta * (1.0 - beta) * g1 * g2 / ((beta * g1 + (1.0 - beta) * g2) * noise_gap);
  const double price = beta * (q * xi_bs + 2.0 * lambda) + (1.0 - beta) * (q * xi_rn + 2.0 * lambda);
  double total = 0.0;
  if (c.effective_gain > 0.0) total = std::max(0.0, 1.0 / (kLn2 * price) - 1.0 / c.effective_gain);
  c.p_bs = beta * total;
  c.p_rn = total - c.p_bs;
  c.marginal = 0.5 * marginal_gain(c.effective_gain * total);
  return c;
}

std::optional<std::size_t> assign_subcarriers(std::span<const Candidate> candidates, TieBreak tie_break,
                                              std::mt19937_64* rng) {
  if (candidates.empty()) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i)
    if (candidates[i].marginal > candidates[best].marginal) best = i;
  if (candidates[best].marginal < 0.0) return std::nullopt;

  if (tie_break == TieBreak::seeded_random && rng != nullptr) {
    std::vector<std::size_t> tied;
    for (std::size_t i = 0; i < candidates.size(); ++i)
      if (candidates[i].marginal == candidates[best].marginal) tied.push_back(i);
    if (tied.size() > 1) {
      std::uniform_int_distribution<std::size_t> pick(0, tied.size() - 1);
      best = tied[pick(*rng)];
    }
  }
  return best;
}

double update_lambda_subgradient(double lambda, double step, double p_max, double p_used) {
  return std::max(0.0, lambda - step * (p_max - p_used));
}

std::vector<Candidate> subcarrier_candidates(double q, double lambda, int n, const ChannelRealization& chan,
                                             const PowerModel& pm) {
  std::vector<Candidate> out;
  const bool relays = chan.has_relays();
  out.reserve(static_cast<std::size_t>(chan.n_users()) * (relays ? 2 : 1));
  for (int k = 0; k < chan.n_users(); ++k) {
    Candidate d = direct_candidate(q, lambda, chan.g_bs_ue(k, n), chan.noise_gap, pm.xi_bs);
    d.user = k;
    out.push_back(d);
    if (relays) {
      const int m = chan.serving_relay[static_cast<std::size_t>(k)];
      Candidate a = af_candidate(q, lambda, chan.g_bs_rn(m, n), chan.g_rn_ue(k, n), chan.noise_gap, pm.xi_bs,
                                 pm.xi_rn);
      a.user = k;
      out.push_back(a);
    }
  }
  return out;
}

InnerResult solve_inner(double q, const ChannelRealization& chan, const Scenario& sc, const SolverParams& params) {
  if (!(q >= 0.0)) throw InvalidParameter("solve_inner: q must be non-negative");
  if (!(sc.power.p_max > 0.0)) throw InvalidParameter("solve_inner: p_max must be positive");
  params.validate();
  require_unit_weights(sc.radio);

  DualEvaluator ev(q, chan, sc, params);
  if (params.lambda_mode == LambdaMode::bisection) return inner_bisection(ev, q, sc.power.p_max, params);
  return inner_subgradient(ev, q, sc.power.p_max, params);
}

int SolverTrace::inner_iterations_total() const {
  int total = 0;
  for (int i : inner_iterations_per_outer) total += i;
  return total;
}

namespace {

Solution make_solution(Allocation alloc, const ChannelRealization& chan, const Scenario& sc) {
  Solution sol;
  sol.metrics = compute_metrics(alloc, chan, sc.radio, sc.power);
  sol.allocation = std::move(alloc);
  return sol;
}

}  // namespace

Solution solve_eem(const ChannelRealization& chan, const Scenario& sc, const SolverParams& params) {
  SolverTrace trace;
  trace.q_sequence.push_back(0.0);

  double q = 0.0;
  std::optional<InnerResult> accepted;
  double accepted_q = 0.0;
  bool converged = false;
  bool inner_limit = false;

  for (int i = 0; i < params.i_outer_max; ++i) {
    InnerResult inner = solve_inner(q, chan, sc, params);
    const double rate = system_rate(inner.allocation, chan, sc.radio);
    const double power = system_power(inner.allocation, sc.power, sc.radio.n_relays);
    const double q_next = rate / power;

    trace.inner_iterations_per_outer.push_back(inner.iterations);
    trace.lambda_final.push_back(inner.lambda);
    inner_limit = inner_limit || inner.hit_limit;

    // An inexact inner solve can return a point worse than the incumbent;
    // the incumbent is then the best this price sequence reaches.
    if (accepted && q_next < q) {
      const double inc_rate = system_rate(accepted->allocation, chan, sc.radio);
      const double inc_power = system_power(accepted->allocation, sc.power, sc.radio.n_relays);
      trace.f_residual = std::max(rate - q * power, inc_rate - q * inc_power);
      converged = true;
      break;
    }
    trace.f_residual = rate - q * power;
    accepted_q = q;
    accepted = std::move(inner);
    trace.q_sequence.push_back(q_next);

    const bool done = q_next - q <= params.eps_outer;
    q = q_next;
    if (done) {
      converged = true;
      break;
    }
  }

  trace.termination = inner_limit ? Termination::inner_limit
                                  : (converged ? Termination::converged : Termination::outer_limit);
  Solution sol = make_solution(std::move(accepted->allocation), chan, sc);
  sol.lambda = accepted->lambda;
  sol.q = accepted_q;
  sol.trace = std::move(trace);
  return sol;
}

Solution solve_sem(const ChannelRealization& chan, const Scenario& sc, const SolverParams& params) {
  InnerResult inner = solve_inner(0.0, chan, sc, params);
  SolverTrace trace;
  trace.q_sequence.push_back(0.0);
  trace.inner_iterations_per_outer.push_back(inner.iterations);
  trace.lambda_final.push_back(inner.lambda);
  trace.termination = inner.hit_limit ? Termination::inner_limit : Termination::converged;

  Solution sol = make_solution(std::move(inner.allocation), chan, sc);
  trace.q_sequence.push_back(sol.metrics.ee);
  trace.f_residual = sol.metrics.rate_total;
  sol.lambda = inner.lambda;
  sol.q = 0.0;
  sol.trace = std::move(trace);
  return sol;
}

}  // namespace eerelay
