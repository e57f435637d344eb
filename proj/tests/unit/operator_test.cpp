#include <doctest.h>

#include "oracles.hpp"
#include "ridepool/error.hpp"
#include "ridepool/fleet_operator.hpp"
#include "ridepool/rng.hpp"
#include "ridepool/synthetic.hpp"

using namespace ridepool;

namespace {

struct Line {
  // 1 - 2 - 3 - 4 - 5, 100 m and 10 s per edge in both directions
  Network network = to_network(make_grid_network(GridSpec{1, 5, 100.0, 10.0, 1, 1}));
  Router router{network, TravelTimeProfile{}};

  Request request(RequestId id, double t, NodeId o, NodeId d) const {
    return Request{id, t, o, d, router.distance(o, d), router.travel_time(o, d, t)};
  }

  OperatorState fleet(std::vector<NodeId> starts) const {
    OperatorConfig cfg;
    cfg.fleet_size = static_cast<int>(starts.size());
    OperatorState s = make_operator(0, cfg, router, starts, 1e4);
    for (std::size_t k = 0; k < starts.size(); ++k) s.vehicles[k].node = starts[k];
    return s;
  }
};

Schedule manual(std::vector<Stop> stops, std::vector<RequestId> bundle) {
  Schedule s;
  s.vehicle = 0;
  s.stops = std::move(stops);
  s.bundle = std::move(bundle);
  return s;
}

}  // namespace

TEST_SUITE("operator") {
  TEST_CASE("empty schedule is feasible") {
    CHECK(check_feasibility(Schedule{}, std::span<const Onboard>{}, Constraints{}, RequestBook{}, 0.0) ==
          Violation::none);
  }

  TEST_CASE("pickup one second past the waiting bound violates the wait condition") {
    RequestBook book{{1, Request{1, 0.0, 1, 2, 100.0, 100.0}}};
    const Schedule s = manual({{1, {1}, {}, 361.0}, {2, {}, {1}, 400.0}}, {1});
    CHECK(check_feasibility(s, std::span<const Onboard>{}, Constraints{}, book, 0.0) == Violation::wait);
    const Schedule ok = manual({{1, {1}, {}, 360.0}, {2, {}, {1}, 400.0}}, {1});
    CHECK(check_feasibility(ok, std::span<const Onboard>{}, Constraints{}, book, 0.0) == Violation::none);
  }

  TEST_CASE("five passengers on board exceed capacity four") {
    RequestBook book;
    std::vector<Onboard> onboard;
    std::vector<RequestId> ids;
    Stop drop{2, {}, {}, 10.0};
    for (RequestId id = 1; id <= 5; ++id) {
      book[id] = Request{id, 0.0, 1, 2, 100.0, 10.0};
      onboard.push_back(Onboard{id, 0.0});
      drop.alight.push_back(id);
      ids.push_back(id);
    }
    const Schedule s = manual({drop}, ids);
    CHECK(check_feasibility(s, onboard, Constraints{}, book, 0.0) == Violation::capacity);
  }

  TEST_CASE("alighting before boarding violates precedence") {
    RequestBook book{{1, Request{1, 0.0, 1, 2, 100.0, 100.0}}};
    const Schedule s = manual({{2, {}, {1}, 10.0}, {1, {1}, {}, 20.0}}, {1});
    CHECK(check_feasibility(s, std::span<const Onboard>{}, Constraints{}, book, 0.0) == Violation::precedence);
  }

  TEST_CASE("ride beyond the relative detour violates the detour condition") {
    RequestBook book{{1, Request{1, 0.0, 1, 2, 100.0, 100.0}}};
    const Schedule s = manual({{1, {1}, {}, 0.0}, {2, {}, {1}, 141.0}}, {1});
    CHECK(check_feasibility(s, std::span<const Onboard>{}, Constraints{}, book, 0.0) == Violation::detour);
    const Schedule ok = manual({{1, {1}, {}, 0.0}, {2, {}, {1}, 140.0}}, {1});
    CHECK(check_feasibility(ok, std::span<const Onboard>{}, Constraints{}, book, 0.0) == Violation::none);
  }

  TEST_CASE("schedule cost follows the objective") {
    RequestBook book{{1, Request{1, 100.0, 1, 2, 1000.0, 300.0}}};
    Schedule s = manual({}, {1});
    s.distance_m = 1000.0;
    s.times = {RequestTimes{1, 200.0, 700.0}};
    const ObjectiveParams p{0.25e-3, 16.2 / 3600.0, 1e4};
    CHECK(schedule_cost(s, p, book) == doctest::Approx(-9997.05).epsilon(1e-12));
    CHECK(schedule_cost(Schedule{}, p, book) == 0.0);

    const ObjectiveParams single{0.25e-3, 0.0, 1e4};
    const ObjectiveParams twice{0.5e-3, 0.0, 1e4};
    const double reward = -1e4;
    CHECK(schedule_cost(s, twice, book) - reward == 2.0 * (schedule_cost(s, single, book) - reward));
  }

  TEST_CASE("idle vehicle at the origin offers zero wait and the direct distance") {
    Line l;
    OperatorState s = l.fleet({2});
    const Request r = l.request(1, 0.0, 2, 5);
    const auto offer = insertion_offer(s, r, 0.0);
    REQUIRE(offer);
    CHECK(offer->wait_s == 0.0);
    CHECK(offer->added_distance_m == r.direct_distance_m);
    CHECK(offer->arrival_s == r.direct_time_s);
    CHECK(check_feasibility(offer->schedule, s.vehicle(0), s.config.constraints, RequestBook{{1, r}}, 0.0) ==
          Violation::none);
  }

  TEST_CASE("no vehicle within the waiting bound means no offer") {
    Line l;
    OperatorState s = l.fleet({1});
    s.config.constraints.max_wait_s = 30.0;  // four edges away takes 40 s
    CHECK_FALSE(insertion_offer(s, l.request(1, 0.0, 5, 1), 0.0).has_value());
  }

  TEST_CASE("book installs the schedule and rejects stale offers") {
    Line l;
    OperatorState s = l.fleet({1, 5});
    const Request a = l.request(1, 0.0, 2, 4);
    const Request b = l.request(2, 0.0, 4, 2);
    const auto oa = insertion_offer(s, a, 0.0);
    const auto ob = insertion_offer(s, b, 0.0);
    REQUIRE(oa);
    REQUIRE(ob);

    const std::uint64_t before = s.version;
    const Schedule prior = s.vehicle(oa->schedule.vehicle).schedule;
    book(s, *oa, a);
    CHECK(s.version == before + 1);
    CHECK(s.requests.contains(1));
    const Schedule& now = s.vehicle(oa->schedule.vehicle).schedule;
    CHECK(std::find(now.bundle.begin(), now.bundle.end(), 1) != now.bundle.end());
    CHECK(now.distance_m - prior.distance_m == oa->added_distance_m);
    CHECK_THROWS_AS(book(s, *ob, b), StaleOfferError);
  }

  TEST_CASE("a declined offer leaves the state untouched") {
    Line l;
    OperatorState s = l.fleet({1});
    const auto version = s.version;
    const auto offer = insertion_offer(s, l.request(1, 0.0, 2, 3), 0.0);
    REQUIRE(offer);
    CHECK(s.version == version);
    CHECK(s.vehicle(0).schedule.empty());
    CHECK(s.requests.empty());
  }

  TEST_CASE("best insertion matches exhaustive enumeration") {
    int compared = 0, offered = 0;
    for (std::uint64_t seed = 1; seed <= 150; ++seed) {
      oracle::InstanceLimits limits;
      limits.max_vehicles = 2;
      oracle::Instance inst = oracle::random_instance(seed, limits);
      OperatorState& s = inst.state;
      for (VehicleState& v : s.vehicles) {
        v.onboard.clear();
        v.schedule = Schedule{};
        v.schedule.vehicle = v.id;
      }
      s.requests.clear();
      const oracle::BruteForceTable table(*inst.network);
      const auto ids = inst.network->node_ids();
      Rng rng(seed * 7 + 1);
      auto random_request = [&](RequestId id) {
        const NodeId o = ids[rng.below(ids.size())];
        NodeId d = ids[rng.below(ids.size())];
        while (d == o) d = ids[rng.below(ids.size())];
        const double t = inst.now - static_cast<double>(rng.below(60));
        return Request{id, t, o, d, inst.router->distance(o, d), inst.router->travel_time(o, d, t)};
      };
      // two prior requests booked through the library, then the probe
      for (RequestId id = 1; id <= 2; ++id) {
        const Request r = random_request(id);
        if (auto o = insertion_offer(s, r, inst.now)) book(s, *o, r);
      }
      const Request probe = random_request(3);
      const auto got = insertion_offer(s, probe, inst.now);
      const auto want = oracle::brute_force_insertion(table, s, probe, inst.now);
      REQUIRE(got.has_value() == want.has_value());
      ++compared;
      if (!got) continue;
      ++offered;
      CHECK(got->cost_delta == want->cost_delta);
      CHECK(got->schedule.vehicle == want->vehicle);
      CHECK(got->added_distance_m == want->added_distance_m);
    }
    CHECK(compared == 150);
    CHECK(offered > 50);
  }

  TEST_CASE("vehicle starts are stable across fleet sizes") {
    Line l;
    const auto ids = l.network.node_ids();
    OperatorConfig small, large;
    small.fleet_size = 3;
    large.fleet_size = 8;
    small.start_seed = large.start_seed = 77;
    const OperatorState a = make_operator(0, small, l.router, ids, 1.0);
    const OperatorState b = make_operator(0, large, l.router, ids, 1.0);
    for (int k = 0; k < 3; ++k) CHECK(a.vehicle(k).node == b.vehicle(k).node);
  }

  TEST_CASE("assignment reward exceeds any single-schedule cost") {
    const double r = default_assignment_reward(0.25e-3, 16.2 / 3600.0, 5000.0, 3600.0, 4);
    CHECK(r == doctest::Approx(10.0 * (0.25e-3 * 20000.0 + 16.2 / 3600.0 * 14400.0)));
    CHECK(r > 0.25e-3 * 20000.0 + 16.2 / 3600.0 * 14400.0);
  }
}
