#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ridepool/assign.hpp"
#include "ridepool/broker.hpp"
#include "ridepool/demand.hpp"
#include "ridepool/economics.hpp"
#include "ridepool/event_log.hpp"
#include "ridepool/fleet_operator.hpp"
#include "ridepool/network.hpp"

namespace ridepool {

struct SimulationConfig {
  ScenarioKind scenario = ScenarioKind::single;
  std::string phase = "base";
  double horizon_s = 3600.0;
  double step_s = 60.0;
  double repo_interval_s = 900.0;
  std::uint64_t seed = 1;
  std::vector<OperatorConfig> operators;
  EconParams econ;
  EnumerationOptions assign;
  bool reoptimize = true;
  bool reposition = true;
  /// Re-check every booked schedule and every delivery against the constraints.
  bool audit = false;
  /// Limit on the time spent after the horizon delivering booked customers.
  double max_drain_s = kSecondsPerDay;
  std::string config_fingerprint;
};

/// Throws ConfigError: step must divide horizon and repositioning interval,
/// and the profile interval must be a multiple of the repositioning interval.
void validate(const SimulationConfig& config, const Router& router);

struct SimulationInput {
  const Router* router = nullptr;
  /// Requests after the horizon are ignored.
  std::span<const Request> requests;
  /// Per-operator forecast; null disables repositioning.
  const Forecast* forecast = nullptr;
  std::span<const NodeId> start_nodes;
};

struct RequestOutcome {
  Request request;
  std::vector<OperatorId> asked;
  std::vector<OperatorId> offered;
  std::optional<OperatorId> op;
  VehicleId vehicle = -1;
  double pickup_s = std::numeric_limits<double>::quiet_NaN();
  double dropoff_s = std::numeric_limits<double>::quiet_NaN();

  bool served() const { return op.has_value(); }
};

struct OperatorSummary {
  OperatorId id = 0;
  int fleet_size = 0;
  /// Sum of entered edge lengths in event order, including empty and repositioning mileage.
  double fleet_distance_m = 0.0;
  std::size_t asked = 0;
  /// Requests forwarded to this operator that got no offer from it.
  std::size_t no_offer = 0;
};

struct ReoptRecord {
  OperatorId op = 0;
  ReoptimizationReport report;
};

struct AuditStats {
  std::size_t schedules_checked = 0;
  std::size_t schedule_violations = 0;
  std::size_t deliveries_checked = 0;
  std::size_t wait_violations = 0;
  std::size_t detour_violations = 0;
  std::vector<std::string> details;  // first few violations

  std::size_t violations() const { return schedule_violations + wait_violations + detour_violations; }
};

struct SimulationResult {
  RunHeader header;
  std::vector<RequestOutcome> outcomes;  // by (request time, id)
  std::vector<OperatorSummary> operators;
  std::vector<ReoptRecord> reopts;
  AuditStats audit;
  double end_time_s = 0.0;
  std::string event_log;
};

struct MotionEvent {
  enum class Kind { move, pickup, dropoff };
  Kind kind = Kind::move;
  double time_s = 0.0;
  VehicleId vehicle = 0;
  RequestId request = 0;
  NodeId from = 0;
  NodeId to = 0;
  double length_m = 0.0;
};

/// Moves every vehicle of the operator from `from` to `to` along shortest-path
/// legs towards its next stop or repositioning target. Edges are entered with
/// travel time base * factor and finished before any new leg starts; the full
/// edge length is added to the odometer on entry. Stops execute on arrival:
/// alighting requests leave `state.requests`, boarding requests become onboard.
std::vector<MotionEvent> advance_vehicles(OperatorState& state, double from, double to, double factor);

/// Runs the step loop: advance vehicles, at repositioning boundaries update
/// the travel-time factor and rebalance, process the step's requests in
/// (time, id) order through the broker, then re-optimize each operator.
/// After the horizon vehicles keep moving until every booked customer is
/// delivered.
SimulationResult run(const SimulationConfig& config, const SimulationInput& input);

}  // namespace ridepool
