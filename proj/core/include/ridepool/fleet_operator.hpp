#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ridepool/demand.hpp"
#include "ridepool/network.hpp"
#include "ridepool/types.hpp"

namespace ridepool {

/// Service-quality bounds shared by every schedule of one operator.
struct Constraints {
  int capacity = 4;
  double max_wait_s = 360.0;
  double max_detour_rel = 0.4;
  /// Dwell added at every stop with boarding or alighting.
  double dwell_s = 0.0;
};

/// Weights of the schedule objective. Units are currency per meter and per second.
struct ObjectiveParams {
  double distance_cost_per_m = 0.25e-3;
  double time_value_per_s = 16.2 / 3600.0;
  double assignment_reward = 1e4;
};

/// 10 x (c_dis * diameter * capacity + c_vot * horizon * capacity), at least 1.
double default_assignment_reward(double distance_cost_per_m, double time_value_per_s, double diameter_m,
                                 double horizon_s, int capacity);

struct Stop {
  NodeId node = 0;
  std::vector<RequestId> board;
  std::vector<RequestId> alight;
  double planned_arrival_s = 0.0;
};

struct RequestTimes {
  RequestId id = 0;
  double pickup_s = 0.0;
  double dropoff_s = 0.0;
};

/// Ordered stop list of one vehicle together with its derived timings.
struct Schedule {
  VehicleId vehicle = -1;
  std::vector<Stop> stops;
  std::vector<RequestId> bundle;     // sorted ascending
  double distance_m = 0.0;           // from the vehicle anchor over all legs
  std::vector<RequestTimes> times;   // aligned with bundle

  bool empty() const { return stops.empty(); }
  const RequestTimes* times_of(RequestId id) const;
};

struct Onboard {
  RequestId id = 0;
  double pickup_s = 0.0;
};

/// Where and when a vehicle can start a new leg.
struct Anchor {
  NodeId node = 0;
  double time_s = 0.0;
};

struct VehicleState {
  VehicleId id = 0;
  NodeId node = 0;                    // last node reached
  std::optional<NodeId> edge_head;    // set while traversing an edge
  double edge_remaining_s = 0.0;
  double busy_until_s = 0.0;          // dwell in progress at `node`
  std::vector<Onboard> onboard;
  Schedule schedule;
  std::optional<NodeId> reposition_target;
  double odometer_m = 0.0;

  /// The vehicle finishes its current edge first, so planning starts at the edge head.
  Anchor anchor(double now) const;
  bool has_customers() const { return !schedule.empty() || !onboard.empty(); }
};

using RequestBook = std::map<RequestId, Request>;

/// Recomputes planned arrivals, distance and per-request times from the anchor.
Schedule time_schedule(VehicleId vehicle, const Anchor& anchor, std::vector<Stop> stops,
                       std::span<const Onboard> onboard, const Router& router, double now, double dwell_s);

enum class Violation { none, precedence, capacity, wait, detour };
std::string_view to_string(Violation v);

/// Checks the four schedule conditions in the order precedence, capacity,
/// wait, detour and returns the first one violated.
Violation check_feasibility(const Schedule& schedule, std::span<const Onboard> onboard, const Constraints& constraints,
                            const RequestBook& requests, double now);
Violation check_feasibility(const Schedule& schedule, const VehicleState& vehicle, const Constraints& constraints,
                            const RequestBook& requests, double now);

/// c_dis * d + c_vot * sum(arrival_i - t_i) - N_R * |bundle|.
double schedule_cost(const Schedule& schedule, const ObjectiveParams& params, const RequestBook& requests);

struct OperatorConfig {
  int fleet_size = 1;
  double distance_cost_per_m = 0.25e-3;
  double time_value_per_s = 16.2 / 3600.0;
  Constraints constraints;
  std::uint64_t start_seed = 1;
  double fare_per_m = 0.0;
};

struct OperatorState {
  OperatorId id = 0;
  OperatorConfig config;
  ObjectiveParams objective;
  const Router* router = nullptr;
  std::vector<VehicleState> vehicles;
  /// Booked requests that have not been dropped off yet.
  RequestBook requests;
  /// Bumped on every mutation; offers carry the version they were built from.
  std::uint64_t version = 0;

  const VehicleState& vehicle(VehicleId id) const { return vehicles.at(static_cast<std::size_t>(id)); }
  VehicleState& vehicle(VehicleId id) { return vehicles.at(static_cast<std::size_t>(id)); }
};

/// Places `config.fleet_size` vehicles uniformly over `start_nodes`. Vehicle k
/// always lands on the same node for a given seed, independent of fleet size.
OperatorState make_operator(OperatorId id, const OperatorConfig& config, const Router& router,
                            std::span<const NodeId> start_nodes, double assignment_reward);

struct Offer {
  OperatorId op = 0;
  RequestId request = 0;
  // user parameters
  double wait_s = 0.0;
  double arrival_s = 0.0;
  double fare = 0.0;
  // system parameters
  double added_distance_m = 0.0;
  double cost_delta = 0.0;
  Schedule schedule;
  std::uint64_t state_version = 0;
};

/// Best insertion of the request into the current schedules (prior stops keep
/// their order). Only vehicles able to reach the origin within the waiting
/// bound are tried. Ties keep the first candidate in (vehicle, pickup
/// position, dropoff position) order.
std::optional<Offer> insertion_offer(const OperatorState& state, const Request& request, double now);

/// Assigns the offer's schedule to its vehicle. Throws StaleOfferError if the
/// state changed since the offer was created.
void book(OperatorState& state, const Offer& offer, const Request& request);

}  // namespace ridepool
