#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "ridepool/demand.hpp"
#include "ridepool/error.hpp"
#include "ridepool/synthetic.hpp"

using namespace ridepool;

namespace {

struct Grid {
  Network network = to_network(make_grid_network(GridSpec{4, 5, 200.0, 10.0, 2, 2}));
  Router router{network, TravelTimeProfile{}};
};

std::vector<TripRecord> uniform_trips(const Network& n, std::size_t count, std::uint64_t seed) {
  const auto ids = n.demand_nodes();
  return generate_synthetic_demand(ids, 3600.0 * static_cast<double>(count) / 36000.0, 36000.0, seed);
}

double binomial_sigma(double n, double p) { return std::sqrt(n * p * (1.0 - p)); }

}  // namespace

TEST_SUITE("demand") {
  TEST_CASE("rate 1 keeps every speed-valid row") {
    Grid g;
    // 1 -> 5 is 800 m; 100 s is 8 m/s, 1000 s is 0.8 m/s
    const std::vector<TripRecord> trips{{1, 10, 1, 5, 100.0}, {2, 20, 1, 5, 1000.0}, {3, 30, 6, 1, std::nullopt}};
    IngestStats stats;
    const auto out = ingest_requests(trips, g.router, 1.0, 3, &stats);
    REQUIRE(out.size() == 2);
    CHECK(out[0].id == 1);
    CHECK(out[1].id == 3);
    CHECK(stats.dropped_speed == 1);
    CHECK(out[0].direct_distance_m == 800.0);
    CHECK(out[0].direct_time_s == 80.0);
  }

  TEST_CASE("speeds outside [1, 30] m/s are dropped") {
    Grid g;
    const std::vector<TripRecord> trips{{1, 0, 1, 2, 400.0}, {2, 0, 1, 2, 200.0}, {3, 0, 1, 2, 6.0},
                                        {4, 0, 1, 2, 7.0}};
    // 200 m over 400 s = 0.5 m/s, 200 s = 1 m/s, 6 s = 33 m/s, 7 s = 28.6 m/s
    const auto out = ingest_requests(trips, g.router, 1.0, 3);
    std::vector<RequestId> ids;
    for (const auto& r : out) ids.push_back(r.id);
    CHECK(ids == std::vector<RequestId>{2, 4});
  }

  TEST_CASE("subsample count stays within three sigma of the binomial") {
    Grid g;
    const auto trips = uniform_trips(g.network, 10000, 17);
    const double n = static_cast<double>(trips.size());
    REQUIRE(n > 9000);
    const auto out = ingest_requests(trips, g.router, 0.1, 99);
    CHECK(std::abs(static_cast<double>(out.size()) - 0.1 * n) <= 3.0 * binomial_sigma(n, 0.1));
  }

  TEST_CASE("ingestion is deterministic and sorted by time then id") {
    Grid g;
    const std::vector<TripRecord> trips{{5, 30, 1, 2, {}}, {3, 10, 2, 3, {}}, {4, 10, 3, 4, {}}, {1, 20, 4, 5, {}}};
    const auto a = ingest_requests(trips, g.router, 0.7, 5);
    const auto b = ingest_requests(trips, g.router, 0.7, 5);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].id == b[i].id);
    const auto all = ingest_requests(trips, g.router, 1.0, 5);
    std::vector<RequestId> ids;
    for (const auto& r : all) ids.push_back(r.id);
    CHECK(ids == std::vector<RequestId>{3, 4, 1, 5});
  }

  TEST_CASE("rate outside (0, 1] is a configuration error") {
    Grid g;
    CHECK_THROWS_AS(ingest_requests({}, g.router, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(ingest_requests({}, g.router, 1.5, 1), ConfigError);
  }

  TEST_CASE("malformed request rows name their line") {
    std::istringstream in("id,request_time_s,origin_node,destination_node\n1,0,1,2\n2,x,1,2\n");
    try {
      read_trip_records(in, "req.csv");
      FAIL("expected a load error");
    } catch (const LoadError& e) {
      CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
  }

  TEST_CASE("request file round trip") {
    const std::vector<TripRecord> trips{{1, 0, 1, 2, 30.0}, {2, 15, 3, 4, std::nullopt}};
    std::ostringstream out;
    write_trip_records(out, trips);
    std::istringstream in(out.str());
    const auto back = read_trip_records(in, "rt");
    REQUIRE(back.size() == 2);
    CHECK(back[0].recorded_duration_s == 30.0);
    CHECK_FALSE(back[1].recorded_duration_s.has_value());
    CHECK(back[1].origin == 3);
  }

  TEST_CASE("forecast scales counts by penetration over operators") {
    Grid g;
    const ZoneId z = g.network.zone_of(1);
    std::vector<TripRecord> trips;
    for (int k = 0; k < 40; ++k) trips.push_back({k, 10.0 * k, 1, 20, std::nullopt});
    const Forecast two = build_forecast(trips, g.network, 0.1, 2, 900.0, 900.0);
    CHECK(two.departures(z, 0) == doctest::Approx(2.0).epsilon(1e-12));
    const Forecast one = build_forecast(trips, g.network, 0.1, 1, 900.0, 900.0);
    CHECK(one.departures(z, 0) == 2.0 * two.departures(z, 0));
    CHECK(one.arrivals(g.network.zone_of(20), 0) == 2.0 * two.arrivals(g.network.zone_of(20), 0));
  }

  TEST_CASE("no trips gives an all-zero forecast") {
    Grid g;
    const Forecast f = build_forecast({}, g.network, 0.5, 2, 900.0, 3600.0);
    CHECK(f.interval_count() == 4);
    for (ZoneId z : g.network.zones()) {
      for (std::size_t k = 0; k < 4; ++k) {
        CHECK(f.departures(z, k) == 0.0);
        CHECK(f.arrivals(z, k) == 0.0);
      }
    }
  }

  TEST_CASE("forecast is linear in the raw counts") {
    Grid g;
    const auto trips = uniform_trips(g.network, 300, 4);
    std::vector<TripRecord> doubled = trips;
    doubled.insert(doubled.end(), trips.begin(), trips.end());
    const Forecast a = build_forecast(trips, g.network, 0.25, 1, 900.0, 36000.0);
    const Forecast b = build_forecast(doubled, g.network, 0.25, 1, 900.0, 36000.0);
    for (ZoneId z : g.network.zones()) {
      for (std::size_t k = 0; k < a.interval_count(); ++k) CHECK(b.departures(z, k) == 2.0 * a.departures(z, k));
    }
  }

  TEST_CASE("split with one operator is the identity") {
    Grid g;
    const auto reqs = ingest_requests(uniform_trips(g.network, 50, 2), g.router, 1.0, 1);
    const auto parts = split_demand(reqs, 1, 8);
    REQUIRE(parts.size() == 1);
    REQUIRE(parts[0].size() == reqs.size());
    for (std::size_t i = 0; i < reqs.size(); ++i) CHECK(parts[0][i].id == reqs[i].id);
  }

  TEST_CASE("two-way split is binomial, a partition and reproducible") {
    Grid g;
    auto trips = uniform_trips(g.network, 1200, 6);
    REQUIRE(trips.size() >= 1000);
    trips.resize(1000);
    const auto reqs = ingest_requests(trips, g.router, 1.0, 1);
    REQUIRE(reqs.size() == 1000);
    const auto parts = split_demand(reqs, 2, 31);
    CHECK(std::abs(static_cast<double>(parts[0].size()) - 500.0) <= 3.0 * binomial_sigma(1000, 0.5));
    std::set<RequestId> seen;
    for (const auto& p : parts) {
      for (const auto& r : p) CHECK(seen.insert(r.id).second);
    }
    CHECK(seen.size() == reqs.size());
    const auto again = split_demand(reqs, 2, 31);
    REQUIRE(again[0].size() == parts[0].size());
    for (std::size_t i = 0; i < parts[0].size(); ++i) CHECK(again[0][i].id == parts[0][i].id);
  }

  TEST_CASE("synthetic demand never repeats origin as destination") {
    Grid g;
    const auto ids = g.network.demand_nodes();
    const auto trips = generate_synthetic_demand(ids, 600.0, 3600.0, 12);
    CHECK(trips.size() > 400);
    for (const auto& t : trips) {
      CHECK(t.origin != t.destination);
      CHECK(t.time_s < 3600.0);
      CHECK(t.time_s == std::floor(t.time_s));
    }
  }

  TEST_CASE("requests on nodes outside the demand subgraph are rejected") {
    const Network n({{1, 0, 0}, {2, 1, 0}, {3, 2, 0}}, {{1, 2, 10, 1}, {2, 1, 10, 1}, {2, 3, 10, 1}});
    const Router r(n, TravelTimeProfile{});
    const std::vector<TripRecord> trips{{1, 0, 1, 3, std::nullopt}};
    CHECK_THROWS_AS(ingest_requests(trips, r, 1.0, 1), LoadError);
  }
}
