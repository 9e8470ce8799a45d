#pragma once

// Energy-efficiency maximisation by Dinkelbach's method. The outer loop
// raises the power price q until R_T - q * P_T reaches zero; each inner
// problem is solved by dual decomposition over the total transmit power
// constraint, with closed-form water-filling per (user, subcarrier,
// protocol) and a winner-take-all subcarrier assignment.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "eerelay/channel.hpp"
#include "eerelay/model.hpp"

namespace eerelay {

enum class LambdaMode { subgradient, bisection };
enum class TieBreak { lowest_index, seeded_random };
enum class Termination { converged, outer_limit, inner_limit };
enum class Protocol { direct, af };

const char* to_string(LambdaMode m);
const char* to_string(TieBreak t);
const char* to_string(Termination t);
const char* to_string(Protocol p);

struct SolverParams {
  int i_outer_max = 10;
  int i_inner_max = 100;
  double eps_outer = 1e-8;
  double eps_inner = 1e-8;
  LambdaMode lambda_mode = LambdaMode::bisection;
  std::optional<double> lambda_step;  ///< subgradient step; unset means 0.05 / p_max
  double lambda_init = 1.0;
  /// When the budget falls inside a jump of the power map, re-water-fill the
  /// feasible assignment to the exact budget instead of leaving slack.
  bool fill_budget = true;
  TieBreak tie_break = TieBreak::lowest_index;
  std::uint64_t tie_seed = 0;

  double step_for(double p_max) const { return lambda_step ? *lambda_step : 0.05 / p_max; }

  /// Throws InvalidParameter on non-positive tolerances, caps or step.
  void validate() const;
};

/// Closed-form optimum of one (user, subcarrier, protocol) subproblem.
struct Candidate {
  int user = 0;
  Protocol protocol = Protocol::direct;
  double p_d = 0.0;
  double p_bs = 0.0;
  double p_rn = 0.0;
  double marginal = 0.0;        ///< D or A: gain in the Lagrangian from taking the subcarrier
  double effective_gain = 0.0;  ///< [1/W]
  double beta = 0.0;            ///< BS->RN share of the AF power

  double total_power() const { return protocol == Protocol::direct ? p_d : p_bs + p_rn; }
};

Candidate direct_candidate(double q, double lambda, double gain, double noise_gap, double xi_bs);

/// Power share of the BS->RN hop, in the form sqrt(g2 b) / (sqrt(g1 a) + sqrt(g2 b))
/// with a = q xi_bs + 2 lambda and b = q xi_rn + 2 lambda.
double af_beta(double q, double lambda, double g1, double g2, double xi_bs, double xi_rn);

Candidate af_candidate(double q, double lambda, double g1, double g2, double noise_gap, double xi_bs,
                       double xi_rn);

/// Index of the candidate with the largest marginal, or nullopt when that
/// marginal is negative. `rng` is only consulted for seeded-random ties.
std::optional<std::size_t> assign_subcarriers(std::span<const Candidate> candidates, TieBreak tie_break,
                                              std::mt19937_64* rng = nullptr);

double update_lambda_subgradient(double lambda, double step, double p_max, double p_used);

struct InnerResult {
  Allocation allocation;
  double lambda = 0.0;
  int iterations = 0;
  bool hit_limit = false;
  double tx_power = 0.0;
};

/// Everything one solve needs besides the channel.
struct Scenario {
  RadioConfig radio;
  PowerModel power;
};

/// All candidates of subcarrier n at (q, lambda), ordered by user, direct
/// before AF; AF is omitted without relays.
std::vector<Candidate> subcarrier_candidates(double q, double lambda, int n, const ChannelRealization& chan,
                                             const PowerModel& pm);

/// Maximises R_T - q P_T under the transmit budget for a fixed price q.
InnerResult solve_inner(double q, const ChannelRealization& chan, const Scenario& sc, const SolverParams& params);

struct SolverTrace {
  std::vector<double> q_sequence;  ///< starts with q0 = 0
  std::vector<int> inner_iterations_per_outer;
  std::vector<double> lambda_final;
  Termination termination = Termination::converged;
  double f_residual = 0.0;  ///< R_T - q P_T of the returned allocation at the price that produced it

  int outer_iterations() const { return static_cast<int>(inner_iterations_per_outer.size()); }
  int inner_iterations_total() const;
};

struct Solution {
  Allocation allocation;
  Metrics metrics;
  SolverTrace trace;
  double lambda = 0.0;  ///< multiplier at which the returned allocation was produced
  double q = 0.0;       ///< price used for the returned allocation
};

Solution solve_eem(const ChannelRealization& chan, const Scenario& sc, const SolverParams& params);

/// Spectral-efficiency maximisation: the q = 0 inner problem.
Solution solve_sem(const ChannelRealization& chan, const Scenario& sc, const SolverParams& params);

}  // namespace eerelay
