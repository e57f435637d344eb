#pragma once

#include <cstddef>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "ridepool/fleet_operator.hpp"

namespace ridepool {

/// Vehicle-to-request-bundle: the cheapest feasible schedule of one vehicle for one bundle.
struct V2RB {
  VehicleId vehicle = 0;
  std::vector<RequestId> bundle;  // sorted; includes the vehicle's onboard requests
  Schedule schedule;
  double cost = 0.0;
  bool incumbent = false;
};

struct EnumerationOptions {
  /// 0 = unlimited. A positive cap drops the completeness guarantee.
  std::size_t max_bundles_per_vehicle = 0;
};

struct EnumerationStats {
  std::size_t vehicle_request_pairs = 0;
  std::size_t shareable_pairs = 0;
  std::size_t bundles_checked = 0;
};

/// Cheapest feasible stop order for `vehicle` serving its onboard requests plus
/// `unpicked`, searched exhaustively with precedence, capacity and time-window
/// pruning. `requests` must contain every involved request.
std::optional<V2RB> best_schedule_for_bundle(const VehicleState& vehicle, std::span<const RequestId> unpicked,
                                             const RequestBook& requests, const Router& router,
                                             const Constraints& constraints, const ObjectiveParams& objective,
                                             double now);

/// True if an empty vehicle placed at either origin at `now` can serve both
/// requests, shared or one after the other.
bool shareable(const Request& a, const Request& b, const Router& router, const Constraints& constraints, double now);

/// Three-step guided search over the operator's active requests.
///
/// 1. vehicle-request pairs where the vehicle reaches the origin within the
///    waiting bound;
/// 2. request-request pairs that a hypothetical vehicle can serve together;
/// 3. bundles grown grade by grade, where a grade-n bundle is only tried if
///    all of its grade-(n-1) sub-bundles were feasible for the vehicle.
///
/// A vehicle's onboard requests belong to every one of its bundles; a
/// non-empty onboard set also yields the onboard-only bundle. Output is
/// sorted by (vehicle, bundle size, bundle).
std::vector<V2RB> enumerate_v2rbs(const OperatorState& state, double now, const EnumerationOptions& options = {},
                                  EnumerationStats* stats = nullptr);

/// Set-partitioning problem over V2RBs: each vehicle takes at most one,
/// each request in `assigned` is covered exactly once, each request in
/// `unassigned` at most once.
struct AssignmentProblem {
  std::vector<V2RB> v2rbs;
  std::vector<RequestId> assigned;
  std::vector<RequestId> unassigned;
};

struct AssignmentSolution {
  std::vector<std::size_t> chosen;  // indices into v2rbs, ordered by vehicle
  double objective = 0.0;
};

/// Sum of chosen costs accumulated in (vehicle, index) order.
double solution_objective(const AssignmentProblem& problem, std::span<const std::size_t> chosen);

class AssignmentSolver {
 public:
  virtual ~AssignmentSolver() = default;
  virtual AssignmentSolution solve(const AssignmentProblem& problem) const = 0;
};

/// Exact depth-first branch and bound over vehicles in id order.
///
/// Each vehicle takes one of its V2RBs or none. Costs are summed left to
/// right in vehicle order, so the optimum equals that sum exactly. States
/// (vehicle, covered requests) keep the cheapest cost seen. Pruning uses a
/// Lagrangian bound whose request multipliers are tuned by subgradient steps
/// from a first feasible dive; an assigned request must be covered before the
/// last vehicle that can serve it is passed. Among equal objectives the
/// lexicographically smallest (vehicle, bundle) list wins.
class ExactCoverSolver final : public AssignmentSolver {
 public:
  AssignmentSolution solve(const AssignmentProblem& problem) const override;
};

/// Solves with the built-in exact backend. Throws InfeasibleAssignmentError.
AssignmentSolution solve_ilp(const AssignmentProblem& problem);

void write_problem(std::ostream& out, const AssignmentProblem& problem);
AssignmentProblem read_problem(std::istream& in);

struct ReoptimizationReport {
  double time_s = 0.0;
  std::size_t requests = 0;
  std::size_t v2rbs = 0;
  double incumbent_objective = 0.0;
  double objective = 0.0;
};

/// Rebuilds all V2RBs for the operator's booked requests, injects every
/// vehicle's current schedule as a V2RB, solves the ILP and installs the
/// chosen schedules. Vehicles without a chosen V2RB become idle.
ReoptimizationReport reoptimize(OperatorState& state, double now, const EnumerationOptions& options = {},
                                const AssignmentSolver* solver = nullptr);

}  // namespace ridepool
