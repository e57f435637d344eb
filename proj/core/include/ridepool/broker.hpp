#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ridepool/fleet_operator.hpp"

namespace ridepool {

enum class ScenarioKind { single, independent, user_decision, broker_decision };

std::string_view to_string(ScenarioKind kind);
/// Throws ConfigError for unknown names.
ScenarioKind parse_scenario_kind(std::string_view name);

/// single needs exactly one operator, every other kind at least two.
void validate_operator_count(ScenarioKind kind, std::size_t operators);

struct Decision {
  RequestId request = 0;
  std::optional<OperatorId> op;  // empty: unserved
  /// Value the choice was based on: arrival time (s) or added distance (m).
  double basis = 0.0;
  /// Number of offers sharing the winning value.
  std::size_t tied = 0;
};

/// Picks the winning offer.
///
/// single and independent accept the sole offer; user_decision minimizes the
/// offered arrival time, broker_decision the added fleet distance. Exact ties
/// are broken uniformly by a draw seeded from (tie_seed, request id).
Decision decide(ScenarioKind kind, RequestId request, std::span<const Offer> offers, std::uint64_t tie_seed);

struct Dispatch {
  std::vector<OperatorId> asked;
  std::vector<Offer> offers;  // in operator order
  Decision decision;
};

/// Forwards the request to the asked operators, collects offers, decides and
/// books the winner. `assigned` selects the only operator asked in the
/// independent scenario; every operator is asked otherwise.
Dispatch dispatch_request(ScenarioKind kind, const Request& request, std::span<OperatorState> operators, double now,
                          std::uint64_t tie_seed, std::optional<OperatorId> assigned = std::nullopt);

}  // namespace ridepool
