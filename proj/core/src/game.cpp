#include "ridepool/game.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "ridepool/error.hpp"
#include "ridepool/report.hpp"

namespace ridepool {
namespace {

bool same_value(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::max(std::abs(a), std::abs(b))); }

bool same_objective(const OperatorParams& a, const OperatorParams& b) {
  return same_value(a.distance_cost_per_m, b.distance_cost_per_m) && same_value(a.time_value_per_s, b.time_value_per_s);
}

/// Runs `task(i)` for i in [0, n) on up to `jobs` threads; results are placed by index.
template <class Task>
void parallel_for(std::size_t n, unsigned jobs, Task task) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1U, jobs), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  for (unsigned w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::string_view to_string(GameTermination t) {
  switch (t) {
    case GameTermination::single_round: return "single_round";
    case GameTermination::equilibrium: return "equilibrium";
    case GameTermination::alternation: return "alternation";
    case GameTermination::turn_limit: return "turn_limit";
  }
  return "unknown";
}

std::vector<ObjectiveOption> default_objective_options() {
  const double per_km = 1e-3;
  const double per_h = 1.0 / 3600.0;
  return {{0.0 * per_km, 16.2 * per_h},
          {0.125 * per_km, 16.2 * per_h},
          {0.25 * per_km, 16.2 * per_h},
          {0.25 * per_km, 8.1 * per_h},
          {0.25 * per_km, 0.0 * per_h}};
}

std::vector<OperatorParams> candidate_grid(const OperatorParams& center, int level, int fleet_step,
                                           double vot_step_per_s, const GameSettings& settings) {
  std::vector<int> fleets;
  const int count = std::max(1, settings.fleet_count);
  for (int k = 0; k < count; ++k) {
    const int size = center.fleet_size + fleet_step * (k - count / 2);
    if (size >= 1) fleets.push_back(size);
  }
  std::vector<ObjectiveOption> objectives;
  if (level == 0 && !settings.objective_options.empty()) {
    objectives = settings.objective_options;
  } else if (level == 0) {
    objectives.push_back({center.distance_cost_per_m, center.time_value_per_s});
  } else {
    const int m = std::max(1, settings.objective_count);
    for (int k = 0; k < m; ++k) {
      const double vot = center.time_value_per_s + vot_step_per_s * (k - m / 2);
      if (vot >= -1e-15) objectives.push_back({center.distance_cost_per_m, std::max(0.0, vot)});
    }
  }
  std::vector<OperatorParams> grid;
  for (int f : fleets) {
    for (const ObjectiveOption& o : objectives) grid.push_back({f, o.distance_cost_per_m, o.time_value_per_s});
  }
  return grid;
}

std::size_t best_cell(std::span<const GameCell> cells) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const GameCell& a = cells[i];
    const GameCell& b = cells[best];
    if (a.metrics.effective_profit != b.metrics.effective_profit) {
      if (a.metrics.effective_profit > b.metrics.effective_profit) best = i;
      continue;
    }
    if (a.params.fleet_size != b.params.fleet_size) {
      if (a.params.fleet_size < b.params.fleet_size) best = i;
      continue;
    }
    if (a.params.time_value_per_s < b.params.time_value_per_s) best = i;
  }
  return best;
}

bool adjacent(const OperatorParams& a, const OperatorParams& b, int level, int fleet_step, double vot_step_per_s,
              const GameSettings& settings) {
  if (same_objective(a, b)) return std::abs(a.fleet_size - b.fleet_size) == fleet_step;
  if (a.fleet_size != b.fleet_size) return false;
  if (level == 0 && !settings.objective_options.empty()) {
    const auto& opts = settings.objective_options;
    auto index = [&](const OperatorParams& p) -> std::ptrdiff_t {
      for (std::size_t i = 0; i < opts.size(); ++i) {
        if (same_value(opts[i].distance_cost_per_m, p.distance_cost_per_m) &&
            same_value(opts[i].time_value_per_s, p.time_value_per_s)) {
          return static_cast<std::ptrdiff_t>(i);
        }
      }
      return -10;
    };
    const auto ia = index(a), ib = index(b);
    return ia >= 0 && ib >= 0 && std::abs(ia - ib) == 1;
  }
  return same_value(a.distance_cost_per_m, b.distance_cost_per_m) &&
         same_value(std::abs(a.time_value_per_s - b.time_value_per_s), vot_step_per_s);
}

std::optional<OperatorParams> detect_alternation(std::span<const OperatorParams> choices, int level, int fleet_step,
                                                 double vot_step_per_s, const GameSettings& settings) {
  if (choices.size() < 4) return std::nullopt;
  const std::size_t n = choices.size();
  const OperatorParams& a = choices[n - 4];
  const OperatorParams& b = choices[n - 3];
  if (a == b || !(choices[n - 2] == a) || !(choices[n - 1] == b)) return std::nullopt;
  if (!adjacent(a, b, level, fleet_step, vot_step_per_s, settings)) return std::nullopt;
  return b;
}

GameResult run_game(std::vector<OperatorParams> initial, const GameSettings& settings, const CellEvaluator& evaluate) {
  if (initial.empty()) throw ConfigError("game needs at least one operator");
  GameResult result;
  std::vector<OperatorParams> params = std::move(initial);
  const std::size_t k = params.size();
  int level = 0;
  int fleet_step = settings.fleet_step;
  double vot_step = settings.vot_step_per_s;
  std::vector<OperatorParams> choices;  // chosen params per turn at the current level
  std::vector<std::vector<OperatorParams>> own(k);  // the same split by operator

  for (int turn = 0; turn < settings.turn_limit; ++turn) {
    const auto active = static_cast<OperatorId>(static_cast<std::size_t>(turn) % k);
    GameTurn record;
    record.turn = turn;
    record.active = active;
    record.level = level;
    record.fleet_step = fleet_step;
    record.vot_step_per_s = vot_step;
    record.params_before = params;
    const auto grid = candidate_grid(params[static_cast<std::size_t>(active)], level, fleet_step, vot_step, settings);
    record.cells.resize(grid.size());
    parallel_for(grid.size(), settings.jobs, [&](std::size_t i) {
      std::vector<OperatorParams> trial = params;
      trial[static_cast<std::size_t>(active)] = grid[i];
      const std::vector<CellMetrics> metrics = evaluate(trial);
      record.cells[i] = GameCell{grid[i], metrics.at(static_cast<std::size_t>(active))};
    });
    record.chosen = best_cell(record.cells);
    const OperatorParams chosen = record.cells[record.chosen].params;
    const OperatorParams previous = params[static_cast<std::size_t>(active)];
    params[static_cast<std::size_t>(active)] = chosen;
    result.turns.push_back(std::move(record));

    if (k == 1) {
      result.termination = GameTermination::single_round;
      break;
    }
    const bool symmetric = std::all_of(params.begin(), params.end(), [&](const auto& p) { return p == params[0]; });
    if (symmetric && chosen == previous) {
      const int next_fleet_step = std::max(settings.min_fleet_step, fleet_step / 2);
      const double next_vot_step = level == 0 ? vot_step : std::max(settings.min_vot_step_per_s, vot_step / 2.0);
      if (level > 0 && next_fleet_step == fleet_step && next_vot_step == vot_step) {
        result.termination = GameTermination::equilibrium;
        break;
      }
      ++level;
      fleet_step = next_fleet_step;
      vot_step = next_vot_step;
      choices.clear();
      for (auto& c : own) c.clear();
      continue;
    }
    choices.push_back(chosen);
    own[static_cast<std::size_t>(active)].push_back(chosen);
    auto jump = detect_alternation(choices, level, fleet_step, vot_step, settings);
    if (!jump) jump = detect_alternation(own[static_cast<std::size_t>(active)], level, fleet_step, vot_step, settings);
    if (jump) {
      std::fill(params.begin(), params.end(), *jump);
      result.termination = GameTermination::alternation;
      break;
    }
  }
  result.final_params = params;
  return result;
}

CellEvaluator simulation_evaluator(SimulationConfig base, SimulationInput input) {
  return [base = std::move(base), input](const std::vector<OperatorParams>& params) {
    SimulationConfig cfg = base;
    if (params.size() != cfg.operators.size()) throw ConfigError("parameter count does not match operator count");
    for (std::size_t o = 0; o < params.size(); ++o) {
      cfg.operators[o].fleet_size = params[o].fleet_size;
      cfg.operators[o].distance_cost_per_m = params[o].distance_cost_per_m;
      cfg.operators[o].time_value_per_s = params[o].time_value_per_s;
    }
    const SimulationResult sim = run(cfg, input);
    const KpiReport kpis = compute_kpis(sim);
    std::vector<CellMetrics> out;
    for (std::size_t o = 0; o < params.size(); ++o) {
      const KpiRow& row = kpis.rows.at(o);
      out.push_back(CellMetrics{row.profit, row.effective_profit, row.served_frac});
    }
    return out;
  };
}

std::vector<SweepRow> sweep_fleet_sizes(const SimulationConfig& base, const SimulationInput& input,
                                        std::span<const int> fleet_sizes, unsigned jobs) {
  std::vector<SweepRow> rows(fleet_sizes.size());
  parallel_for(fleet_sizes.size(), jobs, [&](std::size_t i) {
    SimulationConfig cfg = base;
    for (auto& oc : cfg.operators) oc.fleet_size = fleet_sizes[i];
    const SimulationResult sim = run(cfg, input);
    const KpiReport kpis = compute_kpis(sim);
    SweepRow row;
    row.fleet_size = fleet_sizes[i];
    row.horizon_s = cfg.horizon_s;
    for (std::size_t o = 0; o < cfg.operators.size(); ++o) {
      const KpiRow& k = kpis.rows.at(o);
      row.served_direct_distance_m.push_back(k.served_direct_distance_m);
      row.fleet_distance_m.push_back(k.fleet_distance_m);
      row.no_offer_by_operator.push_back(k.n_no_offer);
    }
    const KpiRow& all = kpis.rows.back();
    row.service_rate = all.served_frac;
    row.no_offer = all.n_no_offer;
    rows[i] = std::move(row);
  });
  return rows;
}

double sweep_profit(const SweepRow& row, const EconParams& econ) {
  double total = 0.0;
  for (std::size_t o = 0; o < row.served_direct_distance_m.size(); ++o) {
    total += compute_profit(row.served_direct_distance_m[o], row.fleet_distance_m[o], row.fleet_size, row.horizon_s,
                            econ)
                 .profit;
  }
  return total;
}

CalibrationResult calibrate(std::vector<SweepRow>& sweep, const EconParams& econ,
                            const CalibrationSettings& settings) {
  if (sweep.empty()) throw CalibrationError("empty fleet-size sweep");
  if (!(settings.penalty_resolution > 0.0)) throw ConfigError("penalty resolution must be positive");
  std::sort(sweep.begin(), sweep.end(), [](const SweepRow& a, const SweepRow& b) { return a.fleet_size < b.fleet_size; });

  const auto target = std::find_if(sweep.begin(), sweep.end(),
                                   [&](const SweepRow& r) { return r.service_rate >= settings.target_service_rate; });
  if (target == sweep.end()) {
    throw CalibrationError(fmt::format("target service rate {} not reached for fleet sizes {}..{} (best {})",
                                       settings.target_service_rate, sweep.front().fleet_size,
                                       sweep.back().fleet_size,
                                       std::max_element(sweep.begin(), sweep.end(), [](const auto& a, const auto& b) {
                                         return a.service_rate < b.service_rate;
                                       })->service_rate));
  }
  const std::size_t star = static_cast<std::size_t>(target - sweep.begin());

  double served = 0.0;
  for (double d : target->served_direct_distance_m) served += d;
  if (!(served > 0.0)) throw CalibrationError("no served distance at the calibrated fleet size");
  EconParams zero_fare = econ;
  zero_fare.fare_per_m = 0.0;
  const double cost = -sweep_profit(*target, zero_fare);

  CalibrationResult out;
  out.fleet_size = target->fleet_size;
  out.fare_per_m = cost / served;
  EconParams priced = econ;
  priced.fare_per_m = out.fare_per_m;
  for (SweepRow& row : sweep) row.profit = sweep_profit(row, priced);
  out.profit = target->profit;
  out.revenue = served * out.fare_per_m;

  const auto steps = static_cast<long long>(std::floor(settings.penalty_max / settings.penalty_resolution + 1e-9));
  for (long long s = 0; s <= steps; ++s) {
    const double penalty = static_cast<double>(s) * settings.penalty_resolution;
    std::size_t best = 0;
    double best_value = 0.0;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      const double v = compute_effective_profit(sweep[i].profit, sweep[i].no_offer, penalty);
      if (i == 0 || v > best_value) {
        best = i;
        best_value = v;
      }
    }
    if (best == star) {
      out.no_offer_penalty = penalty;
      for (SweepRow& row : sweep) row.effective_profit = compute_effective_profit(row.profit, row.no_offer, penalty);
      return out;
    }
  }
  throw CalibrationError(fmt::format("no penalty up to {} makes fleet size {} the effective-profit maximum",
                                     settings.penalty_max, out.fleet_size));
}

}  // namespace ridepool
