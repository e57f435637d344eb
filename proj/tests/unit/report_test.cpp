#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "ridepool/error.hpp"
#include "ridepool/report.hpp"
#include "ridepool/synthetic.hpp"

using namespace ridepool;

namespace {

/// Two identical trips 1 -> 5 on a line served by one vehicle of capacity 2.
SimulationResult pooled_run() {
  static const Network n = to_network(make_grid_network(GridSpec{1, 5, 100.0, 10.0, 1, 1}));
  static const Router router(n, TravelTimeProfile{});
  const double d = router.distance(1, 5);
  const double t = router.travel_time(1, 5, 0.0);
  const std::vector<Request> reqs{{1, 0.0, 1, 5, d, t}, {2, 0.0, 1, 5, d, t}};
  const std::vector<NodeId> starts{1};
  SimulationConfig cfg;
  cfg.horizon_s = 600.0;
  cfg.operators.push_back(OperatorConfig{});
  cfg.operators[0].fleet_size = 1;
  cfg.operators[0].constraints.capacity = 2;
  return run(cfg, SimulationInput{&router, reqs, nullptr, starts});
}

void check_same(const SimulationResult& a, const SimulationResult& b) {
  REQUIRE(a.outcomes.size() == b.outcomes.size());
  for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
    const auto& x = a.outcomes[i];
    const auto& y = b.outcomes[i];
    CHECK(x.request.id == y.request.id);
    CHECK(x.request.time_s == y.request.time_s);
    CHECK(x.request.direct_distance_m == y.request.direct_distance_m);
    CHECK(x.op == y.op);
    CHECK(x.asked == y.asked);
    CHECK(x.offered == y.offered);
    if (x.served()) {
      CHECK(x.pickup_s == y.pickup_s);
      CHECK(x.dropoff_s == y.dropoff_s);
    }
  }
  REQUIRE(a.operators.size() == b.operators.size());
  for (std::size_t o = 0; o < a.operators.size(); ++o) {
    CHECK(a.operators[o].fleet_distance_m == b.operators[o].fleet_distance_m);
    CHECK(a.operators[o].no_offer == b.operators[o].no_offer);
    CHECK(a.operators[o].fleet_size == b.operators[o].fleet_size);
  }
  REQUIRE(a.reopts.size() == b.reopts.size());
  for (std::size_t i = 0; i < a.reopts.size(); ++i) {
    CHECK(a.reopts[i].report.objective == b.reopts[i].report.objective);
    CHECK(a.reopts[i].report.incumbent_objective == b.reopts[i].report.incumbent_objective);
  }
}

std::string kpi_csv(const SimulationResult& r) {
  std::ostringstream out;
  write_kpi_csv(out, compute_kpis(r));
  return out.str();
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("rsd of direct and fleet distances") {
    CHECK(compute_rsd(1000.0, 1000.0) == 0.0);
    CHECK(compute_rsd(1000.0, 500.0) == 0.5);
    CHECK(compute_rsd(0.0, 300.0) == 0.0);
    CHECK(compute_rsd(1000.0, 1500.0) == -0.5);
  }

  TEST_CASE("two pooled identical trips give rsd one half") {
    const SimulationResult r = pooled_run();
    REQUIRE(r.outcomes.size() == 2);
    CHECK(r.outcomes[0].served());
    CHECK(r.outcomes[1].served());
    CHECK(r.operators[0].fleet_distance_m == 400.0);
    CHECK(compute_rsd(r, std::nullopt) == 0.5);
    CHECK(compute_rsd(r, OperatorId{0}) == 0.5);
    const KpiReport k = compute_kpis(r);
    CHECK(k.rows.back().op == "all");
    CHECK(k.rows.back().rsd_defined);
    CHECK(k.rows.back().mean_wait_s == 0.0);
  }

  TEST_CASE("nothing served leaves rsd undefined and zero") {
    fixtures::GridScenario g;
    g.rate_per_hour = 0.0;
    g.forecast = false;
    const SimulationResult r = fixtures::load(g)->run();
    const KpiReport k = compute_kpis(r);
    CHECK(k.rows.back().rsd == 0.0);
    CHECK_FALSE(k.rows.back().rsd_defined);
    CHECK(k.rows.back().served_frac == 0.0);
  }

  TEST_CASE("kpi csv layout") {
    const std::string csv = kpi_csv(pooled_run());
    std::istringstream in(csv);
    std::string comment, header, first, all;
    std::getline(in, comment);
    std::getline(in, header);
    std::getline(in, first);
    std::getline(in, all);
    CHECK(comment.rfind("# config_fingerprint=", 0) == 0);
    CHECK(header ==
          "scenario,phase,operator,served_frac,profit_eur,eff_profit_eur,rsd,mean_wait_s,mean_rel_detour,fleet_km,"
          "n_no_offer");
    CHECK(first.rfind("single,base,0,1,", 0) == 0);
    CHECK(all.rfind("single,base,all,1,", 0) == 0);
  }

  TEST_CASE("emission is byte identical across runs") {
    fixtures::GridScenario g;
    g.fleets = {2, 2};
    g.scenario = "broker_decision";
    const auto l = fixtures::load(g);
    const SimulationResult a = l->run();
    const SimulationResult b = l->run();
    CHECK(a.event_log == b.event_log);
    CHECK(kpi_csv(a) == kpi_csv(b));
    std::ostringstream ja, jb;
    write_kpi_json(ja, compute_kpis(a));
    write_kpi_json(jb, compute_kpis(b));
    CHECK(ja.str() == jb.str());
  }

  TEST_CASE("game history has one row per evaluated cell") {
    GameResult g;
    for (int t = 0; t < 3; ++t) {
      GameTurn turn;
      turn.turn = t;
      turn.cells.resize(static_cast<std::size_t>(4 + t));
      g.turns.push_back(turn);
    }
    std::ostringstream out;
    write_game_history_csv(out, g);
    std::istringstream in(out.str());
    std::string line;
    std::size_t rows = 0;
    std::getline(in, line);
    CHECK(line ==
          "turn,active,level,fleet_step,fleet_size,c_dis_eur_per_km,c_vot_eur_per_h,profit_eur,eff_profit_eur,"
          "service_rate,chosen");
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 4 + 5 + 6);
  }

  TEST_CASE("replay rebuilds the result from the log") {
    for (const char* scenario : {"single", "independent", "user_decision", "broker_decision"}) {
      fixtures::GridScenario g;
      g.scenario = scenario;
      g.fleets = std::string(scenario) == "single" ? std::vector<int>{3} : std::vector<int>{2, 2};
      const SimulationResult r = fixtures::load(g)->run();
      std::istringstream in(r.event_log);
      const SimulationResult back = replay_event_log(in);
      check_same(r, back);
      CHECK(kpi_csv(back) == kpi_csv(r));
    }
  }

  TEST_CASE("malformed logs are rejected") {
    std::istringstream garbage("not json\n");
    CHECK_THROWS_AS(replay_event_log(garbage), LoadError);
    std::istringstream empty("");
    CHECK_THROWS_AS(replay_event_log(empty), LoadError);
    std::istringstream headless(R"({"time":0,"kind":"pickup","payload":{}})"
                                "\n");
    CHECK_THROWS_AS(replay_event_log(headless), LoadError);

    const SimulationResult r = pooled_run();
    std::string log = r.event_log;
    log += R"({"time":1,"kind":"teleport","payload":{}})"
           "\n";
    std::istringstream unknown(log);
    CHECK_THROWS_AS(replay_event_log(unknown), LoadError);
  }

  TEST_CASE("fingerprints are stable hex digests") {
    CHECK(fingerprint("") == "cbf29ce484222325");
    CHECK(fingerprint("a") == "af63dc4c8601ec8c");
    CHECK(fingerprint("abc") != fingerprint("abd"));
  }
}
