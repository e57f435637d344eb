#pragma once

#include <cstddef>

#include "ridepool/types.hpp"

namespace ridepool {

/// Monetary parameters in euro, per meter and per vehicle-day.
struct EconParams {
  double fare_per_m = 0.43e-3;
  double vehicle_cost_per_day = 25.0;
  double distance_cost_per_m = 0.25e-3;
  double no_offer_penalty = 0.46;
};

struct Profit {
  double revenue = 0.0;
  double cost = 0.0;
  double profit = 0.0;
};

/// R = f * sum(d_direct); C = N_v * C_v * horizon_days + d_fleet * c_dis; P = R - C.
inline Profit compute_profit(double served_direct_distance_m, double fleet_distance_m, int fleet_size,
                             double horizon_s, const EconParams& econ) {
  Profit p;
  p.revenue = served_direct_distance_m * econ.fare_per_m;
  p.cost = static_cast<double>(fleet_size) * econ.vehicle_cost_per_day * (horizon_s / kSecondsPerDay) +
           fleet_distance_m * econ.distance_cost_per_m;
  p.profit = p.revenue - p.cost;
  return p;
}

/// P_eff = P - N_no * p_no.
inline double compute_effective_profit(double profit, std::size_t no_offer_count, double penalty) {
  return profit - static_cast<double>(no_offer_count) * penalty;
}

}  // namespace ridepool
