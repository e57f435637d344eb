#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ridepool/economics.hpp"
#include "ridepool/game.hpp"
#include "ridepool/simulation.hpp"

namespace ridepool {

/// (sum of served direct distances - fleet distance) / sum of served direct distances; 0 without served distance.
double compute_rsd(double served_direct_distance_m, double fleet_distance_m);

/// rsd of one operator, or of all operators when `op` is empty.
double compute_rsd(const SimulationResult& result, std::optional<OperatorId> op);

/// Profit of one operator with the fixed cost pro-rated over the horizon.
Profit compute_profit(const SimulationResult& result, const EconParams& econ, OperatorId op);

struct KpiRow {
  std::string scenario;
  std::string phase;
  std::string op;  // operator id, or "all"
  std::size_t requests = 0;
  std::size_t served = 0;
  double served_frac = 0.0;
  double profit = 0.0;
  double effective_profit = 0.0;
  double rsd = 0.0;
  bool rsd_defined = false;
  double mean_wait_s = 0.0;
  double mean_rel_detour = 0.0;
  double served_direct_distance_m = 0.0;
  double fleet_distance_m = 0.0;
  std::size_t n_no_offer = 0;
};

/// One row per operator, then the aggregate row "all". Aggregate counts,
/// distances and profits are sums over operators; aggregate rsd uses the sums.
struct KpiReport {
  std::vector<KpiRow> rows;
  std::string config_fingerprint;
  std::uint64_t seed = 0;
};

/// Service rate, profits, rsd and mean wait / relative detour over served
/// requests, using the economics recorded in the result header.
KpiReport compute_kpis(const SimulationResult& result);

/// CSV with a leading `# config_fingerprint=... seed=...` comment line.
void write_kpi_csv(std::ostream& out, const KpiReport& report);
void write_kpi_json(std::ostream& out, const KpiReport& report);

/// Rebuilds the result record (outcomes, operator summaries, re-optimization
/// reports) from an event log. Throws LoadError on malformed records.
SimulationResult replay_event_log(std::istream& in);

/// One row per (turn, cell).
void write_game_history_csv(std::ostream& out, const GameResult& game);
void write_game_json(std::ostream& out, const GameResult& game);

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> sweep);
void write_calibration_json(std::ostream& out, const CalibrationResult& calibration, double target_service_rate);

/// FNV-1a 64-bit hash as 16 hex digits.
std::string fingerprint(std::string_view data);

}  // namespace ridepool
