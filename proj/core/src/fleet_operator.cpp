#include "ridepool/fleet_operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ridepool/error.hpp"
#include "ridepool/rng.hpp"

namespace ridepool {

double default_assignment_reward(double distance_cost_per_m, double time_value_per_s, double diameter_m,
                                 double horizon_s, int capacity) {
  const double d_max = diameter_m * capacity;
  const double t_max = horizon_s * capacity;
  return std::max(1.0, 10.0 * (distance_cost_per_m * d_max + time_value_per_s * t_max));
}

const RequestTimes* Schedule::times_of(RequestId id) const {
  const auto it = std::lower_bound(bundle.begin(), bundle.end(), id);
  if (it == bundle.end() || *it != id) return nullptr;
  return &times[static_cast<std::size_t>(it - bundle.begin())];
}

Anchor VehicleState::anchor(double now) const {
  if (edge_head) return {*edge_head, now + edge_remaining_s};
  return {node, std::max(now, busy_until_s)};
}

Schedule time_schedule(VehicleId vehicle, const Anchor& anchor, std::vector<Stop> stops,
                       std::span<const Onboard> onboard, const Router& router, double now, double dwell_s) {
  Schedule s;
  s.vehicle = vehicle;
  double t = anchor.time_s;
  NodeId prev = anchor.node;
  for (Stop& stop : stops) {
    if (stop.node != prev) {
      t += router.travel_time(prev, stop.node, now);
      s.distance_m += router.distance(prev, stop.node);
    }
    stop.planned_arrival_s = t;
    if (!stop.board.empty() || !stop.alight.empty()) t += dwell_s;
    prev = stop.node;
  }
  s.stops = std::move(stops);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::map<RequestId, RequestTimes> times;
  for (const Onboard& o : onboard) times[o.id] = RequestTimes{o.id, o.pickup_s, nan};
  for (const Stop& stop : s.stops) {
    for (RequestId id : stop.board) {
      auto [it, inserted] = times.try_emplace(id, RequestTimes{id, nan, nan});
      if (std::isnan(it->second.pickup_s)) it->second.pickup_s = stop.planned_arrival_s;
    }
    for (RequestId id : stop.alight) {
      auto [it, inserted] = times.try_emplace(id, RequestTimes{id, nan, nan});
      if (std::isnan(it->second.dropoff_s)) it->second.dropoff_s = stop.planned_arrival_s;
    }
  }
  s.bundle.reserve(times.size());
  s.times.reserve(times.size());
  for (const auto& [id, rt] : times) {
    s.bundle.push_back(id);
    s.times.push_back(rt);
  }
  return s;
}

std::string_view to_string(Violation v) {
  switch (v) {
    case Violation::none: return "ok";
    case Violation::precedence: return "precedence";
    case Violation::capacity: return "capacity";
    case Violation::wait: return "wait";
    case Violation::detour: return "detour";
  }
  return "unknown";
}

Violation check_feasibility(const Schedule& schedule, std::span<const Onboard> onboard, const Constraints& constraints,
                            const RequestBook& requests, double /*now*/) {
  // Precedence: onboard requests alight once and never board; every other
  // request boards once, strictly before it alights once.
  std::map<RequestId, int> state;  // 0 = waiting, 1 = in vehicle, 2 = delivered
  for (const Onboard& o : onboard) state[o.id] = 1;
  for (const Stop& stop : schedule.stops) {
    for (RequestId id : stop.alight) {
      auto it = state.find(id);
      if (it == state.end() || it->second != 1) return Violation::precedence;
      it->second = 2;
    }
    for (RequestId id : stop.board) {
      if (state.contains(id)) return Violation::precedence;
      if (!requests.contains(id)) return Violation::precedence;
      state[id] = 1;
    }
  }
  for (const auto& [id, st] : state) {
    if (st != 2) return Violation::precedence;
  }

  int load = static_cast<int>(onboard.size());
  if (load > constraints.capacity) return Violation::capacity;
  for (const Stop& stop : schedule.stops) {
    load -= static_cast<int>(stop.alight.size());
    load += static_cast<int>(stop.board.size());
    if (load > constraints.capacity) return Violation::capacity;
  }

  auto onboard_pickup = [&](RequestId id) -> std::optional<double> {
    for (const Onboard& o : onboard) {
      if (o.id == id) return o.pickup_s;
    }
    return std::nullopt;
  };

  for (const Stop& stop : schedule.stops) {
    for (RequestId id : stop.board) {
      const Request& r = requests.at(id);
      if (stop.planned_arrival_s > r.time_s + constraints.max_wait_s + kTimeTolerance) return Violation::wait;
    }
  }

  std::map<RequestId, double> pickup;
  for (const Stop& stop : schedule.stops) {
    for (RequestId id : stop.board) pickup[id] = stop.planned_arrival_s;
    for (RequestId id : stop.alight) {
      const auto it = requests.find(id);
      if (it == requests.end()) return Violation::precedence;
      const double start = pickup.contains(id) ? pickup[id] : *onboard_pickup(id);
      const double ride = stop.planned_arrival_s - start;
      if (ride > (1.0 + constraints.max_detour_rel) * it->second.direct_time_s + kTimeTolerance) {
        return Violation::detour;
      }
    }
  }
  return Violation::none;
}

Violation check_feasibility(const Schedule& schedule, const VehicleState& vehicle, const Constraints& constraints,
                            const RequestBook& requests, double now) {
  return check_feasibility(schedule, vehicle.onboard, constraints, requests, now);
}

double schedule_cost(const Schedule& schedule, const ObjectiveParams& params, const RequestBook& requests) {
  double time_sum = 0.0;
  for (const RequestTimes& rt : schedule.times) time_sum += rt.dropoff_s - requests.at(rt.id).time_s;
  return params.distance_cost_per_m * schedule.distance_m + params.time_value_per_s * time_sum -
         params.assignment_reward * static_cast<double>(schedule.bundle.size());
}

OperatorState make_operator(OperatorId id, const OperatorConfig& config, const Router& router,
                            std::span<const NodeId> start_nodes, double assignment_reward) {
  if (config.fleet_size < 0) throw ConfigError(fmt::format("operator {}: negative fleet size", id));
  if (start_nodes.empty()) throw ConfigError("no start nodes for vehicles");
  OperatorState state;
  state.id = id;
  state.config = config;
  state.router = &router;
  state.objective = ObjectiveParams{config.distance_cost_per_m, config.time_value_per_s, assignment_reward};
  Rng rng(config.start_seed);
  for (int k = 0; k < config.fleet_size; ++k) {
    VehicleState v;
    v.id = k;
    v.node = start_nodes[rng.below(start_nodes.size())];
    v.schedule.vehicle = k;
    state.vehicles.push_back(std::move(v));
  }
  return state;
}

std::optional<Offer> insertion_offer(const OperatorState& state, const Request& request, double now) {
  const Router& router = *state.router;
  const Constraints& cons = state.config.constraints;
  RequestBook book = state.requests;
  book[request.id] = request;

  std::optional<Offer> best;
  for (const VehicleState& v : state.vehicles) {
    const Anchor anchor = v.anchor(now);
    const double reach = anchor.time_s + router.travel_time(anchor.node, request.origin, now);
    if (reach > request.time_s + cons.max_wait_s + kTimeTolerance) continue;

    const Schedule prior = time_schedule(v.id, anchor, v.schedule.stops, v.onboard, router, now, cons.dwell_s);
    const double prior_cost = schedule_cost(prior, state.objective, state.requests);
    const std::size_t m = prior.stops.size();
    for (std::size_t p = 0; p <= m; ++p) {
      for (std::size_t q = p + 1; q <= m + 1; ++q) {
        std::vector<Stop> stops;
        stops.reserve(m + 2);
        for (std::size_t k = 0; k <= m; ++k) {
          if (k == p) stops.push_back(Stop{request.origin, {request.id}, {}, 0.0});
          if (stops.size() == q) stops.push_back(Stop{request.destination, {}, {request.id}, 0.0});
          if (k < m) stops.push_back(prior.stops[k]);
        }
        if (stops.size() == q) stops.push_back(Stop{request.destination, {}, {request.id}, 0.0});
        Schedule cand = time_schedule(v.id, anchor, std::move(stops), v.onboard, router, now, cons.dwell_s);
        if (check_feasibility(cand, v.onboard, cons, book, now) != Violation::none) continue;
        const double delta = schedule_cost(cand, state.objective, book) - prior_cost;
        if (best && !(delta < best->cost_delta)) continue;
        const RequestTimes* rt = cand.times_of(request.id);
        Offer offer;
        offer.op = state.id;
        offer.request = request.id;
        offer.wait_s = rt->pickup_s - request.time_s;
        offer.arrival_s = rt->dropoff_s;
        offer.fare = state.config.fare_per_m * request.direct_distance_m;
        offer.added_distance_m = cand.distance_m - prior.distance_m;
        offer.cost_delta = delta;
        offer.schedule = std::move(cand);
        offer.state_version = state.version;
        best = std::move(offer);
      }
    }
  }
  return best;
}

void book(OperatorState& state, const Offer& offer, const Request& request) {
  if (offer.op != state.id) {
    throw StaleOfferError(fmt::format("offer for operator {} booked at operator {}", offer.op, state.id));
  }
  if (offer.state_version != state.version) {
    throw StaleOfferError(fmt::format("offer for request {} built from state version {} but operator {} is at {}",
                                      offer.request, offer.state_version, state.id, state.version));
  }
  if (offer.request != request.id) throw StaleOfferError("offer and request ids differ");
  VehicleState& v = state.vehicle(offer.schedule.vehicle);
  v.schedule = offer.schedule;
  v.reposition_target.reset();
  state.requests[request.id] = request;
  ++state.version;
}

}  // namespace ridepool
