#pragma once

// Exhaustive baseline for tiny instances: every subcarrier/protocol
// assignment, each with powers and AF splits searched on refined grids.
// It shares no code path with the dual solver beyond the rate and power
// formulas of the model.

#include <functional>
#include <vector>

#include "eerelay/model.hpp"
#include "eerelay/solver.hpp"

namespace eerelay {

struct GridSpec {
  int power_points = 200;  ///< log-spaced over [p_max 1e-6, p_max]
  int beta_points = 101;   ///< uniform over [0, 1]
  int refine_rounds = 2;   ///< each round shrinks the brackets 10x around the incumbent

  void validate() const;
};

/// What one subcarrier carries in an assignment.
struct SlotChoice {
  int user = -1;  ///< -1 means idle
  Protocol protocol = Protocol::direct;

  bool idle() const { return user < 0; }
  bool operator==(const SlotChoice&) const = default;
};

using Assignment = std::vector<SlotChoice>;  ///< indexed by subcarrier

/// Number of assignments, i.e. (1 + K * protocols)^N; throws
/// InstanceTooLarge above 10^6.
std::size_t count_assignments(int n_users, int n_subcarriers, int n_relays);

/// Calls `visit` for every assignment in lexicographic order (idle first,
/// then users ascending, direct before AF).
void for_each_assignment(int n_users, int n_subcarriers, int n_relays,
                         const std::function<void(const Assignment&)>& visit);

std::vector<Assignment> enumerate_assignments(int n_users, int n_subcarriers, int n_relays);

struct GridOptimum {
  Allocation allocation;
  double rate = 0.0;
  double power = 0.0;
  double ee = 0.0;
};

enum class GridObjective { energy_efficiency, spectral_efficiency };

/// Best feasible powers for a fixed assignment. At most three active
/// subcarriers are supported (InstanceTooLarge otherwise).
GridOptimum optimize_powers_on_grid(const Assignment& assignment, const ChannelRealization& chan,
                                    const Scenario& sc, const GridSpec& grid,
                                    GridObjective objective = GridObjective::energy_efficiency);

struct OracleResult {
  Solution eem;
  Solution sem;
  Assignment eem_assignment;
  Assignment sem_assignment;
  std::size_t assignments_searched = 0;
};

OracleResult brute_force_eem(const ChannelRealization& chan, const Scenario& sc, const GridSpec& grid = {});

/// Assignment implied by an allocation (idle where every entry is Idle).
Assignment assignment_of(const Allocation& alloc);

}  // namespace eerelay
