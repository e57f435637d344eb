#include "ridepool/event_log.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

namespace ridepool {
namespace {

using nlohmann::ordered_json;

std::string record(double t, const char* kind, ordered_json payload) {
  ordered_json j;
  j["time"] = t;
  j["kind"] = kind;
  j["payload"] = std::move(payload);
  return j.dump();
}

}  // namespace

void EventLog::run(const RunHeader& h) {
  ordered_json p;
  p["scenario"] = h.scenario;
  p["phase"] = h.phase;
  p["horizon_s"] = h.horizon_s;
  p["step_s"] = h.step_s;
  p["repo_interval_s"] = h.repo_interval_s;
  p["seed"] = h.seed;
  p["fleet_sizes"] = h.fleet_sizes;
  p["fare_per_m"] = h.econ.fare_per_m;
  p["vehicle_cost_per_day"] = h.econ.vehicle_cost_per_day;
  p["distance_cost_per_m"] = h.econ.distance_cost_per_m;
  p["no_offer_penalty"] = h.econ.no_offer_penalty;
  p["config_fingerprint"] = h.config_fingerprint;
  append(0.0, record(0.0, "run", std::move(p)));
}

void EventLog::request(double t, const Request& r, std::span<const OperatorId> asked) {
  ordered_json p;
  p["id"] = r.id;
  p["request_time_s"] = r.time_s;
  p["origin"] = r.origin;
  p["destination"] = r.destination;
  p["direct_distance_m"] = r.direct_distance_m;
  p["direct_time_s"] = r.direct_time_s;
  p["asked"] = std::vector<OperatorId>(asked.begin(), asked.end());
  append(t, record(t, "request", std::move(p)));
}

void EventLog::offer(double t, const Offer& o) {
  ordered_json p;
  p["request"] = o.request;
  p["op"] = o.op;
  p["vehicle"] = o.schedule.vehicle;
  p["wait_s"] = o.wait_s;
  p["arrival_s"] = o.arrival_s;
  p["fare"] = o.fare;
  p["added_distance_m"] = o.added_distance_m;
  p["cost_delta"] = o.cost_delta;
  append(t, record(t, "offer", std::move(p)));
}

void EventLog::decision(double t, const Decision& d) {
  ordered_json p;
  p["request"] = d.request;
  if (d.op) {
    p["op"] = *d.op;
    p["basis"] = d.basis;
  } else {
    p["op"] = nullptr;
  }
  p["tied"] = d.tied;
  append(t, record(t, "decision", std::move(p)));
}

void EventLog::pickup(double t, OperatorId op, VehicleId vehicle, RequestId request) {
  append(t, record(t, "pickup", ordered_json{{"request", request}, {"op", op}, {"vehicle", vehicle}}));
}

void EventLog::dropoff(double t, OperatorId op, VehicleId vehicle, RequestId request) {
  append(t, record(t, "dropoff", ordered_json{{"request", request}, {"op", op}, {"vehicle", vehicle}}));
}

void EventLog::reposition(double t, OperatorId op, const RepositionTask& task) {
  ordered_json p;
  p["op"] = op;
  p["vehicle"] = task.vehicle;
  p["from"] = task.from;
  p["target"] = task.target;
  p["from_zone"] = task.from_zone;
  p["to_zone"] = task.to_zone;
  append(t, record(t, "reposition", std::move(p)));
}

void EventLog::reopt(double t, OperatorId op, const ReoptimizationReport& r) {
  ordered_json p;
  p["op"] = op;
  p["requests"] = r.requests;
  p["v2rbs"] = r.v2rbs;
  p["incumbent_objective"] = r.incumbent_objective;
  p["objective"] = r.objective;
  append(t, record(t, "reopt", std::move(p)));
}

void EventLog::move(double t, OperatorId op, VehicleId vehicle, NodeId from, NodeId to, double length_m) {
  ordered_json p;
  p["op"] = op;
  p["vehicle"] = vehicle;
  p["from"] = from;
  p["to"] = to;
  p["length_m"] = length_m;
  append(t, record(t, "move", std::move(p)));
}

void EventLog::write(std::ostream& out) const {
  for (const auto& [t, line] : entries_) out << line << '\n';
}

std::string EventLog::str() const {
  std::ostringstream out;
  write(out);
  return out.str();
}

}  // namespace ridepool
