#include <doctest.h>

#include <cmath>

#include "ridepool/economics.hpp"
#include "ridepool/error.hpp"
#include "ridepool/game.hpp"

using namespace ridepool;

namespace {

GameCell cell(int fleet, double vot, double effective) {
  GameCell c;
  c.params = OperatorParams{fleet, 0.25e-3, vot};
  c.metrics.effective_profit = effective;
  return c;
}

/// Every operator's payoff peaks at `best` fleet vehicles regardless of the others.
CellEvaluator peaked(int best) {
  return [best](const std::vector<OperatorParams>& params) {
    std::vector<CellMetrics> out;
    for (const auto& p : params) {
      const double v = -std::abs(static_cast<double>(p.fleet_size - best));
      out.push_back(CellMetrics{v, v, 1.0});
    }
    return out;
  };
}

SweepRow row(int fleet, double rate, std::size_t no_offer, double served_m, double fleet_m) {
  SweepRow r;
  r.fleet_size = fleet;
  r.service_rate = rate;
  r.no_offer = no_offer;
  r.served_direct_distance_m = {served_m};
  r.fleet_distance_m = {fleet_m};
  r.no_offer_by_operator = {no_offer};
  r.horizon_s = kSecondsPerDay;
  return r;
}

}  // namespace

TEST_SUITE("game") {
  TEST_CASE("profit algebra") {
    const EconParams econ;
    const Profit idle = compute_profit(0.0, 0.0, 10, kSecondsPerDay, econ);
    CHECK(idle.revenue == 0.0);
    CHECK(idle.profit == doctest::Approx(-250.0).epsilon(1e-12));
    CHECK(compute_profit(2000.0, 0.0, 0, kSecondsPerDay, econ).revenue == doctest::Approx(0.86).epsilon(1e-12));
    CHECK(compute_effective_profit(100.0, 50, 0.46) == doctest::Approx(77.0).epsilon(1e-12));
    const Profit half_day = compute_profit(0.0, 1000.0, 4, kSecondsPerDay / 2.0, econ);
    CHECK(half_day.cost == doctest::Approx(4 * 25.0 / 2.0 + 0.25).epsilon(1e-12));
  }

  TEST_CASE("candidate grid drops fleets below one and orders by fleet then objective") {
    GameSettings s;
    s.objective_options = default_objective_options();
    const auto grid = candidate_grid(OperatorParams{40, 0.25e-3, 16.2 / 3600.0}, 0, 20, s.vot_step_per_s, s);
    REQUIRE(grid.size() == 4 * 5);
    CHECK(grid.front().fleet_size == 20);
    CHECK(grid.back().fleet_size == 80);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(grid[i].distance_cost_per_m == s.objective_options[i].distance_cost_per_m);
      CHECK(grid[i].time_value_per_s == s.objective_options[i].time_value_per_s);
    }

    const auto refined = candidate_grid(OperatorParams{40, 0.25e-3, 4.05 / 3600.0}, 1, 10, 4.05 / 3600.0, s);
    // fleets 10..60, time values 4.05 * (1 + k - 3) per hour clipped at zero
    CHECK(refined.size() == 6 * 4);
    for (const auto& p : refined) {
      CHECK(p.time_value_per_s >= 0.0);
      CHECK(p.distance_cost_per_m == 0.25e-3);
    }
  }

  TEST_CASE("best cell prefers profit, then smaller fleet, then smaller time value") {
    const std::vector<GameCell> by_profit{cell(20, 0, 1.0), cell(40, 0, 3.0), cell(60, 0, 2.0)};
    CHECK(best_cell(by_profit) == 1);
    const std::vector<GameCell> by_fleet{cell(40, 0, 3.0), cell(20, 0.001, 3.0), cell(60, 0, 3.0)};
    CHECK(best_cell(by_fleet) == 1);
    const std::vector<GameCell> by_vot{cell(20, 0.004, 3.0), cell(20, 0.002, 3.0), cell(20, 0.003, 3.0)};
    CHECK(best_cell(by_vot) == 1);
    const std::vector<GameCell> identical{cell(20, 0.002, 3.0), cell(20, 0.002, 3.0)};
    CHECK(best_cell(identical) == 0);
  }

  TEST_CASE("alternation between adjacent cells returns the post-jump set") {
    GameSettings s;
    const OperatorParams a{40, 0.25e-3, 16.2 / 3600.0};
    const OperatorParams b{60, 0.25e-3, 16.2 / 3600.0};
    const OperatorParams far{80, 0.25e-3, 16.2 / 3600.0};
    const std::vector<OperatorParams> abab{a, b, a, b};
    const auto jump = detect_alternation(abab, 0, 20, s.vot_step_per_s, s);
    REQUIRE(jump);
    CHECK(*jump == b);
    const std::vector<OperatorParams> aab{a, a, b, a};
    CHECK_FALSE(detect_alternation(aab, 0, 20, s.vot_step_per_s, s));
    const std::vector<OperatorParams> not_adjacent{a, far, a, far};
    CHECK_FALSE(detect_alternation(not_adjacent, 0, 20, s.vot_step_per_s, s));
    const std::vector<OperatorParams> short_run{a, b, a};
    CHECK_FALSE(detect_alternation(short_run, 0, 20, s.vot_step_per_s, s));
  }

  TEST_CASE("a one-cell grid leaves the parameters unchanged") {
    GameSettings s;
    s.fleet_count = 1;
    s.objective_count = 1;
    const std::vector<OperatorParams> start{{30, 0.25e-3, 0.0}, {30, 0.25e-3, 0.0}};
    const GameResult r = run_game(start, s, peaked(10));
    CHECK(r.final_params == start);
    CHECK(r.termination == GameTermination::equilibrium);
  }

  TEST_CASE("a single operator plays one round and adopts the dominant cell") {
    GameSettings s;
    const GameResult r = run_game({{40, 0.25e-3, 0.0}}, s, peaked(60));
    CHECK(r.termination == GameTermination::single_round);
    REQUIRE(r.turns.size() == 1);
    CHECK(r.turns[0].cells.size() == 4);
    CHECK(r.final_params[0].fleet_size == 60);
  }

  TEST_CASE("turn limit zero plays no turn") {
    GameSettings s;
    s.turn_limit = 0;
    const std::vector<OperatorParams> start{{40, 0.25e-3, 0.0}, {40, 0.25e-3, 0.0}};
    const GameResult r = run_game(start, s, peaked(60));
    CHECK(r.turns.empty());
    CHECK(r.final_params == start);
    CHECK(r.termination == GameTermination::turn_limit);
    CHECK_FALSE(r.converged());
  }

  TEST_CASE("symmetric toy game converges to the shared optimum") {
    GameSettings s;
    const GameResult r = run_game({{40, 0.25e-3, 0.0}, {40, 0.25e-3, 0.0}}, s, peaked(50));
    CHECK(r.converged());
    CHECK(r.turns.size() <= 10);
    CHECK(r.final_params[0] == r.final_params[1]);
    CHECK(r.final_params[0].fleet_size == 50);
  }

  TEST_CASE("an alternating toy game stops on the post-jump set") {
    // each operator wants one step more than the other, capped at 60
    const CellEvaluator leapfrog = [](const std::vector<OperatorParams>& p) {
      std::vector<CellMetrics> out;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const int other = p[1 - i].fleet_size;
        const int want = other >= 60 ? 40 : other + 20;
        const double v = -std::abs(static_cast<double>(p[i].fleet_size - want));
        out.push_back(CellMetrics{v, v, 1.0});
      }
      return out;
    };
    GameSettings s;
    const GameResult r = run_game({{40, 0.25e-3, 0.0}, {40, 0.25e-3, 0.0}}, s, leapfrog);
    CHECK(r.termination == GameTermination::alternation);
    CHECK(r.final_params[0] == r.final_params[1]);
    CHECK(r.turns.size() <= 10);
  }

  TEST_CASE("one operator alternating between adjacent cells ends the game") {
    // operator 0 swings between 60 and 40 while operator 1 jumps between 40 and 80
    const CellEvaluator swing = [](const std::vector<OperatorParams>& p) {
      const int want0 = p[1].fleet_size == 80 ? 40 : 60;
      const int want1 = p[0].fleet_size == 60 ? 80 : 40;
      const double v0 = -std::abs(static_cast<double>(p[0].fleet_size - want0));
      const double v1 = -std::abs(static_cast<double>(p[1].fleet_size - want1));
      return std::vector<CellMetrics>{{v0, v0, 1.0}, {v1, v1, 1.0}};
    };
    GameSettings s;
    s.fleet_count = 5;
    const GameResult r = run_game({{40, 0.25e-3, 0.0}, {40, 0.25e-3, 0.0}}, s, swing);
    CHECK(r.termination == GameTermination::alternation);
    CHECK(r.turns.size() == 7);
    CHECK(r.final_params[0].fleet_size == 40);
    CHECK(r.final_params[0] == r.final_params[1]);
  }

  TEST_CASE("parallel evaluation gives the same history") {
    GameSettings one, many;
    many.jobs = 4;
    const std::vector<OperatorParams> start{{40, 0.25e-3, 0.0}, {60, 0.25e-3, 0.0}};
    const GameResult a = run_game(start, one, peaked(50));
    const GameResult b = run_game(start, many, peaked(50));
    REQUIRE(a.turns.size() == b.turns.size());
    for (std::size_t t = 0; t < a.turns.size(); ++t) {
      CHECK(a.turns[t].chosen == b.turns[t].chosen);
      REQUIRE(a.turns[t].cells.size() == b.turns[t].cells.size());
      for (std::size_t c = 0; c < a.turns[t].cells.size(); ++c) {
        CHECK(a.turns[t].cells[c].params == b.turns[t].cells[c].params);
        CHECK(a.turns[t].cells[c].metrics.effective_profit == b.turns[t].cells[c].metrics.effective_profit);
      }
    }
  }

  TEST_CASE("calibration breaks even at the target fleet and peaks there") {
    std::vector<SweepRow> sweep{row(30, 0.95, 5, 90000.0, 80000.0), row(10, 0.6, 40, 40000.0, 30000.0),
                                row(20, 0.85, 15, 80000.0, 70000.0)};
    const EconParams econ;
    const CalibrationResult c = calibrate(sweep, econ, CalibrationSettings{});
    CHECK(c.fleet_size == 30);
    const double cost = 30 * 25.0 + 80000.0 * 0.25e-3;
    CHECK(c.fare_per_m == doctest::Approx(cost / 90000.0).epsilon(1e-12));
    CHECK(std::abs(c.profit) < 1e-6 * c.revenue);
    std::size_t best = 0;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      if (sweep[i].effective_profit > sweep[best].effective_profit) best = i;
    }
    CHECK(sweep[best].fleet_size == 30);
    CHECK(sweep[0].fleet_size == 10);
  }

  TEST_CASE("calibration reports unreachable targets") {
    std::vector<SweepRow> sweep{row(10, 0.5, 40, 40000.0, 30000.0)};
    CHECK_THROWS_AS(calibrate(sweep, EconParams{}, CalibrationSettings{}), CalibrationError);
    std::vector<SweepRow> empty;
    CHECK_THROWS_AS(calibrate(empty, EconParams{}, CalibrationSettings{}), CalibrationError);
    std::vector<SweepRow> none_served{row(10, 1.0, 0, 0.0, 0.0)};
    CHECK_THROWS_AS(calibrate(none_served, EconParams{}, CalibrationSettings{}), CalibrationError);
  }

  TEST_CASE("calibration with one swept size needs no penalty") {
    std::vector<SweepRow> sweep{row(5, 1.0, 0, 10000.0, 9000.0)};
    const CalibrationResult c = calibrate(sweep, EconParams{}, CalibrationSettings{});
    CHECK(c.fleet_size == 5);
    CHECK(c.no_offer_penalty == 0.0);
  }
}
