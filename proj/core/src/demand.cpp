#include "ridepool/demand.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "ridepool/csv.hpp"
#include "ridepool/error.hpp"
#include "ridepool/rng.hpp"

namespace ridepool {

std::vector<TripRecord> read_trip_records(std::istream& in, const std::string& source_name) {
  const CsvTable table = CsvTable::parse(in, source_name);
  const auto c_id = table.require_column("id");
  const auto c_time = table.require_column("request_time_s");
  const auto c_o = table.require_column("origin_node");
  const auto c_d = table.require_column("destination_node");
  const auto c_dur = table.column("recorded_duration_s");
  std::vector<TripRecord> trips;
  trips.reserve(table.rows().size());
  for (const auto& row : table.rows()) {
    TripRecord t;
    t.id = table.integer(row, c_id);
    t.time_s = table.number(row, c_time);
    t.origin = table.integer(row, c_o);
    t.destination = table.integer(row, c_d);
    if (c_dur) t.recorded_duration_s = table.optional_number(row, *c_dur);
    if (t.time_s < 0.0) throw LoadError(fmt::format("{}: row {}: negative request time", source_name, row.line));
    if (t.recorded_duration_s && !(*t.recorded_duration_s > 0.0)) {
      throw LoadError(fmt::format("{}: row {}: recorded duration must be positive", source_name, row.line));
    }
    trips.push_back(t);
  }
  return trips;
}

std::vector<TripRecord> read_trip_records_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(fmt::format("{}: cannot open file", path));
  return read_trip_records(in, path);
}

void write_trip_records(std::ostream& out, std::span<const TripRecord> trips) {
  out << "id,request_time_s,origin_node,destination_node,recorded_duration_s\n";
  for (const auto& t : trips) {
    out << fmt::format("{},{},{},{},", t.id, t.time_s, t.origin, t.destination);
    if (t.recorded_duration_s) out << fmt::format("{}", *t.recorded_duration_s);
    out << '\n';
  }
}

namespace {

bool speed_ok(const TripRecord& t, const Router& router, const SpeedFilter& filter) {
  if (!t.recorded_duration_s) return true;
  const double speed = router.distance(t.origin, t.destination) / *t.recorded_duration_s;
  return speed >= filter.min_speed_mps && speed <= filter.max_speed_mps;
}

void check_nodes(const TripRecord& t, const Network& network) {
  for (NodeId n : {t.origin, t.destination}) {
    if (!network.contains(n)) throw LoadError(fmt::format("request {}: unknown node {}", t.id, n));
    if (!network.demand_eligible(n)) throw LoadError(fmt::format("request {}: node {} is not demand-eligible", t.id, n));
  }
}

}  // namespace

std::vector<TripRecord> filter_by_speed(std::span<const TripRecord> trips, const Router& router, SpeedFilter filter) {
  std::vector<TripRecord> out;
  for (const auto& t : trips) {
    check_nodes(t, router.network());
    if (t.origin == t.destination) continue;
    if (speed_ok(t, router, filter)) out.push_back(t);
  }
  return out;
}

std::vector<Request> ingest_requests(std::span<const TripRecord> trips, const Router& router, double subsample_rate,
                                     std::uint64_t seed, IngestStats* stats, SpeedFilter filter) {
  if (!(subsample_rate > 0.0 && subsample_rate <= 1.0)) {
    throw ConfigError(fmt::format("subsample rate {} outside (0, 1]", subsample_rate));
  }
  IngestStats local;
  local.rows = trips.size();
  Rng rng(seed);
  std::vector<Request> out;
  for (const auto& t : trips) {
    check_nodes(t, router.network());
    if (t.origin == t.destination) {
      ++local.dropped_same_node;
      continue;
    }
    if (!speed_ok(t, router, filter)) {
      ++local.dropped_speed;
      continue;
    }
    if (!(rng.uniform() < subsample_rate)) {
      ++local.dropped_subsample;
      continue;
    }
    Request r;
    r.id = t.id;
    r.time_s = t.time_s;
    r.origin = t.origin;
    r.destination = t.destination;
    r.direct_distance_m = router.distance(t.origin, t.destination);
    r.direct_time_s = router.travel_time(t.origin, t.destination, t.time_s);
    out.push_back(r);
  }
  std::stable_sort(out.begin(), out.end(), [](const Request& a, const Request& b) {
    return a.time_s != b.time_s ? a.time_s < b.time_s : a.id < b.id;
  });
  if (stats != nullptr) *stats = local;
  return out;
}

Forecast::Forecast(double interval_s, std::vector<ZoneId> zones, std::size_t intervals)
    : interval_s_(interval_s), zones_(std::move(zones)), intervals_(intervals) {
  std::sort(zones_.begin(), zones_.end());
  departures_.assign(zones_.size() * intervals_, 0.0);
  arrivals_.assign(zones_.size() * intervals_, 0.0);
}

std::size_t Forecast::slot(ZoneId zone, std::size_t interval) const {
  const auto it = std::lower_bound(zones_.begin(), zones_.end(), zone);
  if (it == zones_.end() || *it != zone) throw LoadError(fmt::format("forecast: unknown zone {}", zone));
  return static_cast<std::size_t>(it - zones_.begin()) * intervals_ + interval;
}

double Forecast::departures(ZoneId zone, std::size_t interval) const {
  if (interval >= intervals_) return 0.0;
  return departures_[slot(zone, interval)];
}

double Forecast::arrivals(ZoneId zone, std::size_t interval) const {
  if (interval >= intervals_) return 0.0;
  return arrivals_[slot(zone, interval)];
}

void Forecast::add(ZoneId zone, std::size_t interval, double departures, double arrivals) {
  if (interval >= intervals_) return;
  const auto s = slot(zone, interval);
  departures_[s] += departures;
  arrivals_[s] += arrivals;
}

Forecast build_forecast(std::span<const TripRecord> trips, const Network& network, double penetration,
                        int num_operators, double interval_s, double horizon_s) {
  if (!(penetration > 0.0 && penetration <= 1.0)) throw ConfigError("forecast penetration outside (0, 1]");
  if (num_operators < 1) throw ConfigError("forecast needs at least one operator");
  const auto intervals = static_cast<std::size_t>(std::ceil(horizon_s / interval_s));
  Forecast raw(interval_s, network.zones(), intervals);
  for (const auto& t : trips) {
    const auto k = static_cast<std::size_t>(std::floor(t.time_s / interval_s));
    raw.add(network.zone_of(t.origin), k, 1.0, 0.0);
    raw.add(network.zone_of(t.destination), k, 0.0, 1.0);
  }
  const double scale = penetration / static_cast<double>(num_operators);
  Forecast out(interval_s, network.zones(), intervals);
  for (ZoneId z : network.zones()) {
    for (std::size_t k = 0; k < intervals; ++k) {
      out.add(z, k, raw.departures(z, k) * scale, raw.arrivals(z, k) * scale);
    }
  }
  return out;
}

std::vector<OperatorId> split_assignment(std::span<const Request> requests, int num_operators, std::uint64_t seed) {
  if (num_operators < 1) throw ConfigError("split needs at least one operator");
  Rng rng(seed);
  std::vector<OperatorId> out;
  out.reserve(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i) {
    out.push_back(num_operators == 1 ? 0 : static_cast<OperatorId>(rng.below(static_cast<std::uint64_t>(num_operators))));
  }
  return out;
}

std::vector<std::vector<Request>> split_demand(std::span<const Request> requests, int num_operators,
                                               std::uint64_t seed) {
  const auto owner = split_assignment(requests, num_operators, seed);
  std::vector<std::vector<Request>> out(static_cast<std::size_t>(num_operators));
  for (std::size_t i = 0; i < requests.size(); ++i) out[static_cast<std::size_t>(owner[i])].push_back(requests[i]);
  return out;
}

std::vector<TripRecord> generate_synthetic_demand(std::span<const NodeId> nodes, double rate_per_hour,
                                                  double horizon_s, std::uint64_t seed) {
  if (nodes.size() < 2) throw ConfigError("synthetic demand needs at least two nodes");
  if (!(rate_per_hour > 0.0)) throw ConfigError("synthetic demand rate must be positive");
  Rng rng(seed);
  const double rate_per_s = rate_per_hour / 3600.0;
  std::vector<TripRecord> out;
  double t = rng.exponential(rate_per_s);
  RequestId id = 0;
  while (t < horizon_s) {
    TripRecord rec;
    rec.id = id++;
    rec.time_s = std::floor(t);
    const auto o = rng.below(nodes.size());
    auto d = rng.below(nodes.size() - 1);
    if (d >= o) ++d;
    rec.origin = nodes[o];
    rec.destination = nodes[d];
    out.push_back(rec);
    t += rng.exponential(rate_per_s);
  }
  return out;
}

}  // namespace ridepool
