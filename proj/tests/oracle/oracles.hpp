#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ridepool/assign.hpp"
#include "ridepool/fleet_operator.hpp"
#include "ridepool/network.hpp"
#include "ridepool/repositioning.hpp"
#include "ridepool/synthetic.hpp"

namespace ridepool::oracle {

/// Enumerates every simple path and keeps the fastest, breaking exact ties by
/// the lexicographically smallest node sequence.
std::optional<PathResult> brute_force_path(const Network& network, NodeId origin, NodeId destination,
                                           double factor = 1.0);

/// All-pairs table built from brute_force_path.
class BruteForceTable {
 public:
  BruteForceTable(const Network& network, double factor = 1.0);

  double time(NodeId o, NodeId d) const { return at(o, d).travel_time_s; }
  double distance(NodeId o, NodeId d) const { return at(o, d).distance_m; }
  const PathResult& at(NodeId o, NodeId d) const { return table_.at({o, d}); }

 private:
  std::map<std::pair<NodeId, NodeId>, PathResult> table_;
};

/// One pickup or dropoff event in a stop order.
struct OracleStop {
  NodeId node = 0;
  RequestId id = 0;
  bool pickup = false;
};

struct OracleEval {
  double cost = 0.0;
  double distance_m = 0.0;
};

/// Times the stop order from the vehicle's position and checks precedence,
/// capacity, waiting and detour bounds. Returns the objective if feasible.
std::optional<OracleEval> evaluate_stops(const BruteForceTable& table, const VehicleState& vehicle,
                                         std::span<const OracleStop> stops, const RequestBook& requests,
                                         const Constraints& constraints, const ObjectiveParams& objective, double now);

/// Stop order of a library schedule, alighting before boarding within one stop.
std::vector<OracleStop> to_oracle_stops(const Schedule& schedule);

struct OracleInsertion {
  VehicleId vehicle = 0;
  double cost_delta = 0.0;
  double added_distance_m = 0.0;
};

/// Tries every (vehicle, pickup position, dropoff position) keeping prior
/// stops in order; the first minimum in that order wins.
std::optional<OracleInsertion> brute_force_insertion(const BruteForceTable& table, const OperatorState& state,
                                                     const Request& request, double now);

/// Minimum cost over every precedence-respecting event order for the vehicle
/// serving its onboard requests plus `unpicked`. Timing and the four
/// conditions are evaluated independently of the library.
std::optional<double> brute_force_bundle_cost(const BruteForceTable& table, const VehicleState& vehicle,
                                              std::span<const RequestId> unpicked, const RequestBook& requests,
                                              const Constraints& constraints, const ObjectiveParams& objective,
                                              double now);

struct OracleV2RB {
  VehicleId vehicle = 0;
  std::vector<RequestId> bundle;  // sorted, includes onboard
  double cost = 0.0;
};

/// Every feasible (vehicle, bundle) pair over all subsets of the unpicked requests.
std::vector<OracleV2RB> brute_force_v2rbs(const BruteForceTable& table, const OperatorState& state, double now);

/// Minimum total cost over every assignment of requests to vehicles (or to
/// nobody for optional requests). Empty when `assigned` cannot be covered.
std::optional<double> brute_force_assignment(const BruteForceTable& table, const OperatorState& state,
                                             std::span<const RequestId> assigned, double now);

struct IlpOracleResult {
  std::vector<std::size_t> chosen;  // vehicle order
  double objective = 0.0;
};

/// Exhaustive search over "at most one V2RB per vehicle"; exact ties go to
/// the lexicographically smallest (vehicle, bundle) list.
std::optional<IlpOracleResult> brute_force_ilp(const AssignmentProblem& problem);

/// Enumerates all integral flows meeting every demand within the supplies.
std::optional<double> brute_force_transportation(std::span<const int> supply, std::span<const int> demand,
                                                 const std::vector<std::vector<double>>& cost);

/// Random operator instance on a small random network.
struct Instance {
  NetworkTables tables;
  std::unique_ptr<Network> network;
  std::unique_ptr<Router> router;
  OperatorState state;
  double now = 600.0;
  std::vector<RequestId> assigned;
  std::vector<RequestId> unassigned;
};

struct InstanceLimits {
  int max_nodes = 10;
  int max_vehicles = 3;
  int max_requests = 5;
};

Instance random_instance(std::uint64_t seed, const InstanceLimits& limits = {});

}  // namespace ridepool::oracle
