#include "ridepool/broker.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "ridepool/error.hpp"
#include "ridepool/rng.hpp"

namespace ridepool {

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::single: return "single";
    case ScenarioKind::independent: return "independent";
    case ScenarioKind::user_decision: return "user_decision";
    case ScenarioKind::broker_decision: return "broker_decision";
  }
  return "unknown";
}

ScenarioKind parse_scenario_kind(std::string_view name) {
  for (ScenarioKind k : {ScenarioKind::single, ScenarioKind::independent, ScenarioKind::user_decision,
                         ScenarioKind::broker_decision}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError(fmt::format("unknown scenario '{}' (expected single, independent, user_decision or "
                                "broker_decision)",
                                name));
}

void validate_operator_count(ScenarioKind kind, std::size_t operators) {
  if (kind == ScenarioKind::single && operators != 1) {
    throw ConfigError(fmt::format("scenario single needs exactly 1 operator, got {}", operators));
  }
  if (kind != ScenarioKind::single && operators < 2) {
    throw ConfigError(fmt::format("scenario {} needs at least 2 operators, got {}", to_string(kind), operators));
  }
}

Decision decide(ScenarioKind kind, RequestId request, std::span<const Offer> offers, std::uint64_t tie_seed) {
  Decision d;
  d.request = request;
  if (offers.empty()) return d;
  auto value = [kind](const Offer& o) {
    return kind == ScenarioKind::broker_decision ? o.added_distance_m : o.arrival_s;
  };
  double best = value(offers.front());
  for (const Offer& o : offers) best = std::min(best, value(o));
  std::vector<const Offer*> tied;
  for (const Offer& o : offers) {
    if (value(o) == best) tied.push_back(&o);
  }
  std::size_t pick = 0;
  if (tied.size() > 1) {
    Rng coin(derive_seed(tie_seed, static_cast<std::uint64_t>(request)));
    pick = coin.below(tied.size());
  }
  d.op = tied[pick]->op;
  d.basis = best;
  d.tied = tied.size();
  return d;
}

Dispatch dispatch_request(ScenarioKind kind, const Request& request, std::span<OperatorState> operators, double now,
                          std::uint64_t tie_seed, std::optional<OperatorId> assigned) {
  Dispatch out;
  if (kind == ScenarioKind::independent) {
    if (!assigned) throw ConfigError("independent scenario requires a pre-assigned operator per request");
    out.asked.push_back(*assigned);
  } else {
    for (const OperatorState& op : operators) out.asked.push_back(op.id);
  }
  for (OperatorId id : out.asked) {
    if (auto offer = insertion_offer(operators[static_cast<std::size_t>(id)], request, now)) {
      out.offers.push_back(std::move(*offer));
    }
  }
  out.decision = decide(kind, request.id, out.offers, tie_seed);
  if (out.decision.op) {
    for (const Offer& o : out.offers) {
      if (o.op == *out.decision.op) {
        book(operators[static_cast<std::size_t>(o.op)], o, request);
        break;
      }
    }
  }
  return out;
}

}  // namespace ridepool
