#include "ridepool/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "ridepool/error.hpp"
#include "ridepool/repositioning.hpp"
#include "ridepool/rng.hpp"

namespace ridepool {
namespace {

constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kTieStream = 2;

bool is_multiple(double value, double unit) {
  if (unit <= 0.0) return false;
  const double k = std::round(value / unit);
  return std::abs(k * unit - value) <= 1e-9 * std::max(1.0, std::abs(value));
}

const Network::Arc& arc_between(const Network& net, NodeId from, NodeId to) {
  const auto arcs = net.out_arcs(net.index_of(from));
  const std::uint32_t head = net.index_of(to);
  const auto it = std::lower_bound(arcs.begin(), arcs.end(), head,
                                   [](const Network::Arc& a, std::uint32_t h) { return a.head < h; });
  if (it == arcs.end() || it->head != head) throw Error(fmt::format("no edge {} -> {}", from, to));
  return *it;
}

void advance_one(OperatorState& state, VehicleState& v, double from, double to, double factor,
                 std::vector<MotionEvent>& events) {
  const Router& router = *state.router;
  const Network& net = router.network();
  const double dwell = state.config.constraints.dwell_s;
  double t = from;
  while (true) {
    if (v.edge_head) {
      const double arrive = t + v.edge_remaining_s;
      if (arrive > to) {
        v.edge_remaining_s = arrive - to;
        return;
      }
      t = arrive;
      v.node = *v.edge_head;
      v.edge_head.reset();
      v.edge_remaining_s = 0.0;
      continue;
    }
    if (v.busy_until_s > t) {
      if (v.busy_until_s >= to) return;
      t = v.busy_until_s;
    }
    if (!v.schedule.stops.empty() && v.schedule.stops.front().node == v.node) {
      const Stop stop = v.schedule.stops.front();
      v.schedule.stops.erase(v.schedule.stops.begin());
      for (RequestId id : stop.alight) {
        std::erase_if(v.onboard, [id](const Onboard& o) { return o.id == id; });
        state.requests.erase(id);
        events.push_back(MotionEvent{MotionEvent::Kind::dropoff, t, v.id, id, v.node, v.node, 0.0});
      }
      for (RequestId id : stop.board) {
        v.onboard.push_back(Onboard{id, t});
        events.push_back(MotionEvent{MotionEvent::Kind::pickup, t, v.id, id, v.node, v.node, 0.0});
      }
      if (!stop.board.empty() || !stop.alight.empty()) v.busy_until_s = t + dwell;
      continue;
    }
    if (t >= to) return;
    NodeId target;
    if (!v.schedule.stops.empty()) {
      target = v.schedule.stops.front().node;
    } else if (v.reposition_target) {
      if (*v.reposition_target == v.node) {
        v.reposition_target.reset();
        return;
      }
      target = *v.reposition_target;
    } else {
      return;
    }
    const NodeId next = router.next_hop(v.node, target);
    const Network::Arc& arc = arc_between(net, v.node, next);
    v.edge_head = next;
    v.edge_remaining_s = arc.time_s * factor;
    v.odometer_m += arc.length_m;
    events.push_back(MotionEvent{MotionEvent::Kind::move, t, v.id, 0, v.node, next, arc.length_m});
  }
}

class Simulation {
 public:
  Simulation(const SimulationConfig& config, const SimulationInput& input)
      : cfg_(config), in_(input), router_(*input.router) {}

  SimulationResult run() {
    validate(cfg_, router_);
    const int n_ops = static_cast<int>(cfg_.operators.size());
    for (int k = 0; k < n_ops; ++k) {
      const OperatorConfig& oc = cfg_.operators[static_cast<std::size_t>(k)];
      const double reward = default_assignment_reward(oc.distance_cost_per_m, oc.time_value_per_s,
                                                      router_.diameter_distance_m(), cfg_.horizon_s,
                                                      oc.constraints.capacity);
      ops_.push_back(make_operator(k, oc, router_, in_.start_nodes, reward));
      result_.operators.push_back(OperatorSummary{k, oc.fleet_size, 0.0, 0, 0});
    }

    RunHeader& h = result_.header;
    h.scenario = std::string(to_string(cfg_.scenario));
    h.phase = cfg_.phase;
    h.horizon_s = cfg_.horizon_s;
    h.step_s = cfg_.step_s;
    h.repo_interval_s = cfg_.repo_interval_s;
    h.seed = cfg_.seed;
    for (const auto& oc : cfg_.operators) h.fleet_sizes.push_back(oc.fleet_size);
    h.econ = cfg_.econ;
    h.config_fingerprint = cfg_.config_fingerprint;
    log_.run(h);

    std::vector<Request> requests;
    for (const Request& r : in_.requests) {
      if (r.time_s <= cfg_.horizon_s) requests.push_back(r);
    }
    std::stable_sort(requests.begin(), requests.end(), [](const Request& a, const Request& b) {
      return a.time_s != b.time_s ? a.time_s < b.time_s : a.id < b.id;
    });
    std::vector<OperatorId> assignment;
    if (cfg_.scenario == ScenarioKind::independent) {
      assignment = split_assignment(requests, n_ops, derive_seed(cfg_.seed, kSplitStream));
    }
    for (const Request& r : requests) {
      outcome_index_[r.id] = result_.outcomes.size();
      result_.outcomes.push_back(RequestOutcome{r, {}, {}, std::nullopt, -1, nan(), nan()});
    }
    const std::uint64_t tie_seed = derive_seed(cfg_.seed, kTieStream);

    factor_ = router_.factor_at(0.0);
    const auto steps = static_cast<long long>(std::llround(cfg_.horizon_s / cfg_.step_s));
    std::size_t next = 0;
    for (long long k = 0; k <= steps; ++k) {
      const double now = static_cast<double>(k) * cfg_.step_s;
      if (k > 0) advance(now - cfg_.step_s, now);
      if (now < cfg_.horizon_s && is_multiple(now, cfg_.repo_interval_s)) boundary(now);
      while (next < requests.size() && requests[next].time_s <= now) {
        std::optional<OperatorId> assigned;
        if (!assignment.empty()) assigned = assignment[next];
        process(requests[next], now, tie_seed, assigned);
        ++next;
      }
      if (cfg_.reoptimize) {
        for (OperatorState& op : ops_) {
          if (op.requests.empty()) continue;
          ReoptimizationReport rep = reoptimize(op, now, cfg_.assign);
          log_.reopt(now, op.id, rep);
          result_.reopts.push_back(ReoptRecord{op.id, rep});
          audit_operator(op, now);
        }
      }
    }

    double now = static_cast<double>(steps) * cfg_.step_s;
    while (customers_left()) {
      if (now - cfg_.horizon_s > cfg_.max_drain_s) {
        throw Error(fmt::format("customers still on board {} s after the horizon", cfg_.max_drain_s));
      }
      advance(now, now + cfg_.step_s);
      now += cfg_.step_s;
    }
    result_.end_time_s = now;
    result_.event_log = log_.str();
    return std::move(result_);
  }

 private:
  static double nan() { return std::numeric_limits<double>::quiet_NaN(); }

  bool customers_left() const {
    for (const OperatorState& op : ops_) {
      if (!op.requests.empty()) return true;
    }
    return false;
  }

  void boundary(double now) {
    const double f = router_.factor_at(now);
    if (f != factor_) {
      for (OperatorState& op : ops_) {
        for (VehicleState& v : op.vehicles) {
          if (v.edge_head) v.edge_remaining_s *= f / factor_;
        }
      }
      factor_ = f;
    }
    if (!cfg_.reposition || in_.forecast == nullptr) return;
    for (OperatorState& op : ops_) {
      for (const RepositionTask& task : ridepool::reposition(op, *in_.forecast, now)) log_.reposition(now, op.id, task);
    }
  }

  void process(const Request& r, double now, std::uint64_t tie_seed, std::optional<OperatorId> assigned) {
    Dispatch d = dispatch_request(cfg_.scenario, r, ops_, now, tie_seed, assigned);
    RequestOutcome& out = result_.outcomes[outcome_index_.at(r.id)];
    log_.request(now, r, d.asked);
    out.asked = d.asked;
    for (OperatorId o : d.asked) ++result_.operators[static_cast<std::size_t>(o)].asked;
    for (const Offer& offer : d.offers) {
      log_.offer(now, offer);
      out.offered.push_back(offer.op);
    }
    for (OperatorId o : d.asked) {
      if (std::find(out.offered.begin(), out.offered.end(), o) == out.offered.end()) {
        ++result_.operators[static_cast<std::size_t>(o)].no_offer;
      }
    }
    log_.decision(now, d.decision);
    if (d.decision.op) {
      out.op = d.decision.op;
      OperatorState& op = ops_[static_cast<std::size_t>(*d.decision.op)];
      for (const Offer& offer : d.offers) {
        if (offer.op == op.id) {
          out.vehicle = offer.schedule.vehicle;
          if (cfg_.audit) audit_vehicle(op, op.vehicle(offer.schedule.vehicle), now);
        }
      }
    }
  }

  void advance(double from, double to) {
    // Apply in time order so the log, the outcomes and the distance sums
    // see the same sequence.
    std::vector<std::pair<OperatorId, MotionEvent>> events;
    for (OperatorState& op : ops_) {
      for (const MotionEvent& e : advance_vehicles(op, from, to, factor_)) events.emplace_back(op.id, e);
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const auto& a, const auto& b) { return a.second.time_s < b.second.time_s; });
    for (const auto& [op_id, e] : events) {
      OperatorState& op = ops_[static_cast<std::size_t>(op_id)];
      switch (e.kind) {
        case MotionEvent::Kind::move:
          result_.operators[static_cast<std::size_t>(op_id)].fleet_distance_m += e.length_m;
          log_.move(e.time_s, op_id, e.vehicle, e.from, e.to, e.length_m);
          break;
        case MotionEvent::Kind::pickup:
          result_.outcomes[outcome_index_.at(e.request)].pickup_s = e.time_s;
          log_.pickup(e.time_s, op_id, e.vehicle, e.request);
          break;
        case MotionEvent::Kind::dropoff: {
          RequestOutcome& out = result_.outcomes[outcome_index_.at(e.request)];
          out.dropoff_s = e.time_s;
          out.vehicle = e.vehicle;
          log_.dropoff(e.time_s, op_id, e.vehicle, e.request);
          if (cfg_.audit) audit_delivery(op, out);
          break;
        }
      }
    }
  }

  void note(std::string msg) {
    if (result_.audit.details.size() < 20) result_.audit.details.push_back(std::move(msg));
  }

  void audit_vehicle(const OperatorState& op, const VehicleState& v, double now) {
    ++result_.audit.schedules_checked;
    const Violation viol = check_feasibility(v.schedule, v.onboard, op.config.constraints, op.requests, now);
    if (viol != Violation::none) {
      ++result_.audit.schedule_violations;
      note(fmt::format("t={} op {} vehicle {}: schedule violates {}", now, op.id, v.id, to_string(viol)));
    }
  }

  void audit_operator(const OperatorState& op, double now) {
    if (!cfg_.audit) return;
    for (const VehicleState& v : op.vehicles) {
      if (v.has_customers()) audit_vehicle(op, v, now);
    }
  }

  void audit_delivery(const OperatorState& op, const RequestOutcome& out) {
    const Constraints& c = op.config.constraints;
    const Request& r = out.request;
    ++result_.audit.deliveries_checked;
    if (out.pickup_s - r.time_s > c.max_wait_s + kTimeTolerance) {
      ++result_.audit.wait_violations;
      note(fmt::format("request {}: realized wait {} s", r.id, out.pickup_s - r.time_s));
    }
    if (out.dropoff_s - out.pickup_s > (1.0 + c.max_detour_rel) * r.direct_time_s + kTimeTolerance) {
      ++result_.audit.detour_violations;
      note(fmt::format("request {}: realized ride {} s for direct {} s", r.id, out.dropoff_s - out.pickup_s,
                       r.direct_time_s));
    }
  }

  const SimulationConfig& cfg_;
  const SimulationInput& in_;
  const Router& router_;
  std::vector<OperatorState> ops_;
  EventLog log_;
  SimulationResult result_;
  std::map<RequestId, std::size_t> outcome_index_;
  double factor_ = 1.0;
};

}  // namespace

void validate(const SimulationConfig& config, const Router& router) {
  if (!(config.step_s > 0.0)) throw ConfigError("step_s must be positive");
  if (config.horizon_s < 0.0 || !is_multiple(config.horizon_s, config.step_s)) {
    throw ConfigError(fmt::format("horizon_s {} is not a non-negative multiple of step_s {}", config.horizon_s,
                                  config.step_s));
  }
  if (!is_multiple(config.repo_interval_s, config.step_s)) {
    throw ConfigError(fmt::format("repo_interval_s {} is not a multiple of step_s {}", config.repo_interval_s,
                                  config.step_s));
  }
  if (router.profile().factors().size() > 1 && !is_multiple(router.profile().interval_s(), config.repo_interval_s)) {
    throw ConfigError(fmt::format("travel-time profile interval {} s is not a multiple of repo_interval_s {}",
                                  router.profile().interval_s(), config.repo_interval_s));
  }
  if (config.operators.empty()) throw ConfigError("no operators configured");
  validate_operator_count(config.scenario, config.operators.size());
  for (std::size_t k = 0; k < config.operators.size(); ++k) {
    const OperatorConfig& oc = config.operators[k];
    if (oc.fleet_size < 0) throw ConfigError(fmt::format("operator {}: fleet_size must be >= 0", k));
    if (oc.constraints.capacity < 1) throw ConfigError(fmt::format("operator {}: capacity must be >= 1", k));
    if (oc.constraints.max_wait_s < 0.0 || oc.constraints.max_detour_rel < 0.0 || oc.constraints.dwell_s < 0.0) {
      throw ConfigError(fmt::format("operator {}: constraint bounds must be >= 0", k));
    }
  }
}

std::vector<MotionEvent> advance_vehicles(OperatorState& state, double from, double to, double factor) {
  std::vector<MotionEvent> events;
  for (VehicleState& v : state.vehicles) advance_one(state, v, from, to, factor, events);
  return events;
}

SimulationResult run(const SimulationConfig& config, const SimulationInput& input) {
  if (input.router == nullptr) throw ConfigError("simulation input has no router");
  return Simulation(config, input).run();
}

}  // namespace ridepool
