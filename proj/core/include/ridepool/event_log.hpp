#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ridepool/assign.hpp"
#include "ridepool/broker.hpp"
#include "ridepool/economics.hpp"
#include "ridepool/repositioning.hpp"

namespace ridepool {

/// First record of every log; carries what replay needs besides the events.
struct RunHeader {
  std::string scenario;
  std::string phase = "base";
  double horizon_s = 0.0;
  double step_s = 60.0;
  double repo_interval_s = 900.0;
  std::uint64_t seed = 0;
  std::vector<int> fleet_sizes;
  EconParams econ;
  std::string config_fingerprint;
};

/// Append-only newline-delimited JSON records `{"time", "kind", "payload"}`.
///
/// Kinds: run, request, offer, decision, pickup, dropoff, reposition, reopt,
/// move (one per edge entered, with its length).
class EventLog {
 public:
  void run(const RunHeader& header);
  void request(double t, const Request& r, std::span<const OperatorId> asked);
  void offer(double t, const Offer& o);
  void decision(double t, const Decision& d);
  void pickup(double t, OperatorId op, VehicleId vehicle, RequestId request);
  void dropoff(double t, OperatorId op, VehicleId vehicle, RequestId request);
  void reposition(double t, OperatorId op, const RepositionTask& task);
  void reopt(double t, OperatorId op, const ReoptimizationReport& report);
  void move(double t, OperatorId op, VehicleId vehicle, NodeId from, NodeId to, double length_m);

  std::size_t size() const { return entries_.size(); }
  void write(std::ostream& out) const;
  std::string str() const;

 private:
  void append(double t, std::string line) { entries_.emplace_back(t, std::move(line)); }

  std::vector<std::pair<double, std::string>> entries_;
};

}  // namespace ridepool
