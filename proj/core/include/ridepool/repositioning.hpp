#pragma once

#include <span>
#include <vector>

#include "ridepool/demand.hpp"
#include "ridepool/fleet_operator.hpp"

namespace ridepool {

struct RepositionTask {
  VehicleId vehicle = 0;
  NodeId from = 0;
  NodeId target = 0;
  ZoneId from_zone = 0;
  ZoneId to_zone = 0;
};

struct TransportationPlan {
  /// flow[i][j]: vehicles sent from supply zone i to demand zone j.
  std::vector<std::vector<int>> flow;
  double cost = 0.0;
};

/// Minimum-cost transportation problem with integral supplies and demands.
///
/// Total supply may exceed total demand (excess stays put); the caller scales
/// demand down when it exceeds supply. Solved exactly by successive shortest
/// augmenting paths.
TransportationPlan solve_transportation(std::span<const int> supply, std::span<const int> demand,
                                        const std::vector<std::vector<double>>& cost);

struct ZoneBalance {
  ZoneId zone = 0;
  int idle = 0;
  int movable = 0;
  double need = 0.0;   // max(0, expected departures - expected arrivals)
  int supply = 0;
  int deficit = 0;
};

/// Per-zone supply and deficit for the forecast interval containing `now`.
std::vector<ZoneBalance> zone_balance(const OperatorState& state, const Forecast& forecast, double now);

/// Rebalances idle vehicles towards forecast deficits.
///
/// Idle vehicles are those without customers; a vehicle already repositioning
/// counts towards its target zone and is not moved again. Flows run between
/// zone centroid nodes at shortest-path travel-time cost. Each unit of flow
/// is served by the movable vehicle closest to the target centroid.
std::vector<RepositionTask> reposition(OperatorState& state, const Forecast& forecast, double now);

}  // namespace ridepool
