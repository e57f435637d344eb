#include <doctest.h>

#include <numeric>

#include "oracles.hpp"
#include "ridepool/error.hpp"
#include "ridepool/repositioning.hpp"
#include "ridepool/rng.hpp"
#include "ridepool/synthetic.hpp"

using namespace ridepool;

namespace {

struct Grid {
  Network network = to_network(make_grid_network(GridSpec{4, 5, 200.0, 10.0, 2, 2}));
  Router router{network, TravelTimeProfile{}};

  OperatorState fleet(std::vector<NodeId> starts) const {
    OperatorConfig cfg;
    cfg.fleet_size = static_cast<int>(starts.size());
    OperatorState s = make_operator(0, cfg, router, starts, 1e4);
    for (std::size_t k = 0; k < starts.size(); ++k) s.vehicles[k].node = starts[k];
    return s;
  }

  Forecast forecast(std::vector<std::pair<ZoneId, double>> departures) const {
    Forecast f(900.0, network.zones(), 4);
    for (const auto& [z, dep] : departures) f.add(z, 0, dep, 0.0);
    return f;
  }

  NodeId node_in(ZoneId z) const { return network.nodes_in_zone(z).front(); }
};

}  // namespace

TEST_SUITE("repositioning") {
  TEST_CASE("transportation matches exhaustive flows") {
    Rng rng(5);
    int compared = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t ns = 1 + rng.below(3);
      const std::size_t nd = 1 + rng.below(3);
      std::vector<int> supply(ns), demand(nd);
      for (int& s : supply) s = static_cast<int>(rng.below(4));
      for (int& d : demand) d = static_cast<int>(rng.below(3));
      const int total_supply = std::accumulate(supply.begin(), supply.end(), 0);
      if (std::accumulate(demand.begin(), demand.end(), 0) > total_supply) continue;
      std::vector<std::vector<double>> cost(ns, std::vector<double>(nd));
      for (auto& row : cost) {
        for (double& c : row) c = static_cast<double>(rng.below(50));
      }
      const auto want = oracle::brute_force_transportation(supply, demand, cost);
      REQUIRE(want);
      const TransportationPlan plan = solve_transportation(supply, demand, cost);
      CHECK(plan.cost == *want);
      for (std::size_t j = 0; j < nd; ++j) {
        int in = 0;
        for (std::size_t i = 0; i < ns; ++i) in += plan.flow[i][j];
        CHECK(in == demand[j]);
      }
      for (std::size_t i = 0; i < ns; ++i) {
        CHECK(std::accumulate(plan.flow[i].begin(), plan.flow[i].end(), 0) <= supply[i]);
      }
      ++compared;
    }
    CHECK(compared > 100);
  }

  TEST_CASE("one surplus zone feeding two deficits") {
    const std::vector<int> supply{2, 0, 0};
    const std::vector<int> demand{0, 1, 1};
    const std::vector<std::vector<double>> cost{{0, 5, 7}, {5, 0, 3}, {7, 3, 0}};
    const TransportationPlan plan = solve_transportation(supply, demand, cost);
    CHECK(plan.cost == 12.0);
    CHECK(plan.cost == *oracle::brute_force_transportation(supply, demand, cost));
    CHECK(plan.flow[0][1] == 1);
    CHECK(plan.flow[0][2] == 1);
  }

  TEST_CASE("demand beyond supply is rejected") {
    const std::vector<int> supply{1};
    const std::vector<int> demand{2};
    CHECK_THROWS_AS(solve_transportation(supply, demand, {{1.0}}), ConfigError);
  }

  TEST_CASE("balanced zones produce no tasks") {
    Grid g;
    OperatorState s = g.fleet({g.node_in(0), g.node_in(3)});
    const Forecast f = g.forecast({{0, 1.0}, {3, 1.0}});
    CHECK(reposition(s, f, 0.0).empty());
    for (const auto& v : s.vehicles) CHECK_FALSE(v.reposition_target.has_value());
  }

  TEST_CASE("one surplus and one deficit give exactly one move") {
    Grid g;
    OperatorState s = g.fleet({g.node_in(0)});
    const Forecast f = g.forecast({{3, 1.0}});
    const auto version = s.version;
    const auto tasks = reposition(s, f, 0.0);
    REQUIRE(tasks.size() == 1);
    CHECK(tasks[0].vehicle == 0);
    CHECK(tasks[0].from_zone == 0);
    CHECK(tasks[0].to_zone == 3);
    CHECK(tasks[0].target == g.network.zone_centroid(3));
    CHECK(s.vehicle(0).reposition_target == g.network.zone_centroid(3));
    CHECK(s.version == version + 1);
  }

  TEST_CASE("vehicles already repositioning are not moved again") {
    Grid g;
    OperatorState s = g.fleet({g.node_in(0)});
    const Forecast f = g.forecast({{3, 1.0}});
    REQUIRE(reposition(s, f, 0.0).size() == 1);
    CHECK(reposition(s, f, 0.0).empty());
  }

  TEST_CASE("vehicles with customers are not idle") {
    Grid g;
    OperatorState s = g.fleet({g.node_in(0)});
    s.vehicles[0].onboard.push_back(Onboard{1, 0.0});
    const auto balance = zone_balance(s, g.forecast({{3, 1.0}}), 0.0);
    for (const auto& b : balance) CHECK(b.idle == 0);
  }

  TEST_CASE("the closest movable vehicle serves the flow") {
    Grid g;
    // both in zone 0; node 7 is one block closer to zone 3 than node 1
    REQUIRE(g.network.zone_of(1) == g.network.zone_of(7));
    OperatorState s = g.fleet({1, 7});
    const auto tasks = reposition(s, g.forecast({{0, 1.0}, {3, 1.0}}), 0.0);
    REQUIRE(tasks.size() == 1);
    CHECK(tasks[0].vehicle == 1);
  }
}
