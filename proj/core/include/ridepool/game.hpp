#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ridepool/economics.hpp"
#include "ridepool/simulation.hpp"

namespace ridepool {

/// Service parameters an operator controls in the game.
struct OperatorParams {
  int fleet_size = 1;
  double distance_cost_per_m = 0.25e-3;
  double time_value_per_s = 16.2 / 3600.0;

  bool operator==(const OperatorParams&) const = default;
};

struct ObjectiveOption {
  double distance_cost_per_m = 0.0;
  double time_value_per_s = 0.0;

  bool operator==(const ObjectiveOption&) const = default;
};

/// Outcome of one simulation for one operator.
struct CellMetrics {
  double profit = 0.0;
  double effective_profit = 0.0;
  double service_rate = 0.0;
};

/// Evaluates a full parameter assignment and returns one entry per operator.
/// Called concurrently from several threads.
using CellEvaluator = std::function<std::vector<CellMetrics>(const std::vector<OperatorParams>&)>;

struct GameSettings {
  int turn_limit = 10;
  int fleet_step = 20;
  int fleet_count = 6;
  int min_fleet_step = 5;
  /// Objective axis before the first refinement, in order.
  std::vector<ObjectiveOption> objective_options;
  /// Cells on the refined time-value axis.
  int objective_count = 6;
  /// Time-value spacing of the first refined grid; halved on every later refinement.
  double vot_step_per_s = 4.05 / 3600.0;
  double min_vot_step_per_s = 1.0125 / 3600.0;
  unsigned jobs = 1;
};

/// Default objective options: distance cost 0, 0.125, 0.25 EUR/km at 16.2 EUR/h,
/// then 0.25 EUR/km at 8.1 and 0 EUR/h.
std::vector<ObjectiveOption> default_objective_options();

struct GameCell {
  OperatorParams params;
  CellMetrics metrics;  // of the active operator
};

struct GameTurn {
  int turn = 0;
  OperatorId active = 0;
  int level = 0;
  int fleet_step = 0;
  double vot_step_per_s = 0.0;
  std::vector<OperatorParams> params_before;
  std::vector<GameCell> cells;
  std::size_t chosen = 0;
};

enum class GameTermination { single_round, equilibrium, alternation, turn_limit };
std::string_view to_string(GameTermination t);

struct GameResult {
  std::vector<GameTurn> turns;
  std::vector<OperatorParams> final_params;
  GameTermination termination = GameTermination::turn_limit;
  bool converged() const { return termination != GameTermination::turn_limit; }
};

/// Grid of the active operator for one turn, ordered by fleet size and then
/// objective option. Fleet sizes below 1 are dropped.
std::vector<OperatorParams> candidate_grid(const OperatorParams& center, int level, int fleet_step,
                                           double vot_step_per_s, const GameSettings& settings);

/// Index of the best cell: highest effective profit, ties to the smaller
/// fleet, then the smaller time value, then the first.
std::size_t best_cell(std::span<const GameCell> cells);

/// Cells differing by one step on exactly one axis.
bool adjacent(const OperatorParams& a, const OperatorParams& b, int level, int fleet_step, double vot_step_per_s,
              const GameSettings& settings);

/// Detects A, B, A, B among the last four choices with A and B adjacent and
/// returns B, the set reached by the first jump.
std::optional<OperatorParams> detect_alternation(std::span<const OperatorParams> choices, int level, int fleet_step,
                                                 double vot_step_per_s, const GameSettings& settings);

/// Turn-based best-response game.
///
/// Each turn one operator evaluates its full grid against the others' fixed
/// parameters and adopts the best cell. When every operator holds the same
/// parameters and the active one keeps its own, both steps are halved around
/// the optimum; the game ends at minimum resolution, on adjacent-cell
/// alternation in the joint choice sequence or in one operator's own choices
/// (both operators take the post-jump set), or at the turn limit.
/// A single operator plays exactly one turn.
GameResult run_game(std::vector<OperatorParams> initial, const GameSettings& settings, const CellEvaluator& evaluate);

/// Evaluator that runs the simulation with the given parameters applied to the operators.
CellEvaluator simulation_evaluator(SimulationConfig base, SimulationInput input);

struct SweepRow {
  int fleet_size = 0;  // per operator
  double service_rate = 0.0;
  std::size_t no_offer = 0;
  // per operator
  std::vector<double> served_direct_distance_m;
  std::vector<double> fleet_distance_m;
  std::vector<std::size_t> no_offer_by_operator;
  double horizon_s = 0.0;
  // filled by calibrate
  double profit = 0.0;
  double effective_profit = 0.0;
};

/// Runs the simulation once per fleet size, every operator at that size.
std::vector<SweepRow> sweep_fleet_sizes(const SimulationConfig& base, const SimulationInput& input,
                                        std::span<const int> fleet_sizes, unsigned jobs = 1);

struct CalibrationSettings {
  double target_service_rate = 0.9;
  double penalty_resolution = 0.01;
  double penalty_max = 100.0;
};

struct CalibrationResult {
  int fleet_size = 0;
  double fare_per_m = 0.0;
  double no_offer_penalty = 0.0;
  double revenue = 0.0;  // at fleet_size, fare_per_m
  double profit = 0.0;
};

/// Fleet size: smallest swept size reaching the target rate. Fare: closed-form
/// break-even at that size. Penalty: smallest grid value for which effective
/// profit over the sweep peaks there (ties to smaller fleets). Fills each row's
/// profit fields. Throws CalibrationError.
CalibrationResult calibrate(std::vector<SweepRow>& sweep, const EconParams& econ, const CalibrationSettings& settings);

/// Sum over operators of compute_profit for one sweep row.
double sweep_profit(const SweepRow& row, const EconParams& econ);

}  // namespace ridepool
