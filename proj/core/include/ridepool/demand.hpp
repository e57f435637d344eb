#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ridepool/network.hpp"
#include "ridepool/types.hpp"

namespace ridepool {

/// A travel demand (i, t_i, origin, destination) plus its direct-route figures.
struct Request {
  RequestId id = 0;
  double time_s = 0.0;
  NodeId origin = 0;
  NodeId destination = 0;
  double direct_distance_m = 0.0;
  double direct_time_s = 0.0;
};

/// One row of a requests file before filtering and subsampling.
struct TripRecord {
  RequestId id = 0;
  double time_s = 0.0;
  NodeId origin = 0;
  NodeId destination = 0;
  std::optional<double> recorded_duration_s;
};

/// Reads `id,request_time_s,origin_node,destination_node[,recorded_duration_s]`.
std::vector<TripRecord> read_trip_records(std::istream& in, const std::string& source_name);
std::vector<TripRecord> read_trip_records_file(const std::string& path);
void write_trip_records(std::ostream& out, std::span<const TripRecord> trips);

struct SpeedFilter {
  double min_speed_mps = 1.0;
  double max_speed_mps = 30.0;
};

struct IngestStats {
  std::size_t rows = 0;
  std::size_t dropped_same_node = 0;
  std::size_t dropped_speed = 0;
  std::size_t dropped_subsample = 0;
};

/// Speed filter, seeded Bernoulli subsample, then ordering by (time, id).
///
/// Rows with a recorded duration whose implied average speed (direct distance
/// over duration) falls outside the filter are dropped first. Each remaining
/// row consumes one uniform draw and is kept iff the draw is below
/// `subsample_rate`. Rows with origin == destination are dropped.
std::vector<Request> ingest_requests(std::span<const TripRecord> trips, const Router& router,
                                     double subsample_rate, std::uint64_t seed,
                                     IngestStats* stats = nullptr, SpeedFilter filter = {});

/// Speed-valid rows in file order, without subsampling. Forecasts are built from this set.
std::vector<TripRecord> filter_by_speed(std::span<const TripRecord> trips, const Router& router,
                                        SpeedFilter filter = {});

/// Expected departures and arrivals per (zone, interval), per operator.
class Forecast {
 public:
  Forecast() = default;
  Forecast(double interval_s, std::vector<ZoneId> zones, std::size_t intervals);

  double interval_s() const { return interval_s_; }
  const std::vector<ZoneId>& zones() const { return zones_; }
  std::size_t interval_count() const { return intervals_; }

  double departures(ZoneId zone, std::size_t interval) const;
  double arrivals(ZoneId zone, std::size_t interval) const;
  void add(ZoneId zone, std::size_t interval, double departures, double arrivals);

 private:
  std::size_t slot(ZoneId zone, std::size_t interval) const;

  double interval_s_ = 900.0;
  std::vector<ZoneId> zones_;
  std::size_t intervals_ = 0;
  std::vector<double> departures_;
  std::vector<double> arrivals_;
};

/// Counts trips per zone and interval, times penetration / num_operators.
Forecast build_forecast(std::span<const TripRecord> trips, const Network& network, double penetration,
                        int num_operators, double interval_s, double horizon_s);

/// Assigns every request to one operator uniformly at random; output lists keep input order.
std::vector<std::vector<Request>> split_demand(std::span<const Request> requests, int num_operators,
                                               std::uint64_t seed);

/// Operator index per request, aligned with `requests`.
std::vector<OperatorId> split_assignment(std::span<const Request> requests, int num_operators, std::uint64_t seed);

/// Uniform OD over `nodes` (origin != destination) with Poisson arrivals in [0, horizon).
/// Request times are rounded down to whole seconds.
std::vector<TripRecord> generate_synthetic_demand(std::span<const NodeId> nodes, double rate_per_hour,
                                                  double horizon_s, std::uint64_t seed);

}  // namespace ridepool
