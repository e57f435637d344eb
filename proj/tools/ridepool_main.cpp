// ridepool: command-line front end for simulations, games and calibration.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "ridepool/config.hpp"
#include "ridepool/csv.hpp"
#include "ridepool/error.hpp"
#include "ridepool/game.hpp"
#include "ridepool/report.hpp"
#include "ridepool/simulation.hpp"
#include "ridepool/synthetic.hpp"
#include "ridepool/version.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace ridepool;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

fs::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("RIDEPOOL_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return "ridepool-out";
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("{}: cannot open for writing", path.string()));
  return out;
}

struct Manifest {
  std::string command;
  std::string config;
  fs::path dir;
  ordered_json seeds = ordered_json::object();
  std::string fingerprint;
  std::vector<std::string> files;
  std::vector<std::string> warnings;

  void write() const {
    ordered_json j;
    j["command"] = command;
    j["config"] = config;
    j["seeds"] = seeds;
    j["config_fingerprint"] = fingerprint;
    j["output_dir"] = dir.string();
    j["artifact_version"] = kVersion;
    j["files"] = files;
    j["warnings"] = warnings;
    auto out = open_output(dir / "manifest.json");
    out << j.dump(2) << '\n';
  }
};

ordered_json seed_set(const ScenarioConfig& cfg) {
  ordered_json s;
  s["master"] = cfg.sim.seed;
  s["subsample"] = cfg.subsample_seed;
  if (cfg.synthetic_demand) s["demand"] = cfg.synthetic_demand->seed;
  ordered_json starts = ordered_json::array();
  for (const auto& oc : cfg.sim.operators) starts.push_back(oc.start_seed);
  s["vehicle_start"] = std::move(starts);
  return s;
}

Manifest start_manifest(const std::string& command, const std::string& config_path, const ScenarioConfig& cfg,
                        const fs::path& dir) {
  fs::create_directories(dir);
  Manifest m;
  m.command = command;
  m.config = config_path;
  m.dir = dir;
  m.seeds = seed_set(cfg);
  m.fingerprint = cfg.sim.config_fingerprint;
  return m;
}

template <class Fn>
void emit(Manifest& m, const std::string& name, Fn write) {
  auto out = open_output(m.dir / name);
  write(out);
  m.files.push_back(name);
}

struct CommonOptions {
  std::string config;
  std::string out;
  unsigned jobs = 1;
};

ScenarioOverrides make_overrides(const CLI::Option* seed_opt, std::uint64_t seed, const CLI::Option* scen_opt,
                                 const std::string& scenario, const CLI::Option* fleet_opt, int fleet) {
  ScenarioOverrides o;
  if (seed_opt != nullptr && seed_opt->count() > 0) o.seed = seed;
  if (scen_opt != nullptr && scen_opt->count() > 0) o.scenario = scenario;
  if (fleet_opt != nullptr && fleet_opt->count() > 0) o.fleet_size = fleet;
  return o;
}

int cmd_simulate(const CommonOptions& opt, const ScenarioOverrides& overrides, bool audit, const std::string& phase) {
  ScenarioConfig cfg = load_scenario(opt.config, overrides);
  if (audit) cfg.sim.audit = true;
  if (!phase.empty()) cfg.sim.phase = phase;
  const PreparedScenario prepared = prepare(cfg);
  validate(cfg.sim, *prepared.router);
  const SimulationResult result = run(cfg.sim, prepared.input());
  const KpiReport kpis = compute_kpis(result);

  Manifest m = start_manifest("simulate", opt.config, cfg, output_dir(opt.out));
  emit(m, "events.ndjson", [&](std::ostream& out) { out << result.event_log; });
  emit(m, "kpi.csv", [&](std::ostream& out) { write_kpi_csv(out, kpis); });
  emit(m, "kpi.json", [&](std::ostream& out) { write_kpi_json(out, kpis); });
  if (cfg.sim.audit && result.audit.violations() > 0) {
    m.warnings.push_back(fmt::format("{} constraint violations", result.audit.violations()));
  }
  m.write();
  write_kpi_csv(std::cout, kpis);
  if (cfg.sim.audit) {
    std::cerr << fmt::format("audit: {} schedules, {} deliveries checked, {} violations\n",
                             result.audit.schedules_checked, result.audit.deliveries_checked,
                             result.audit.violations());
    for (const auto& d : result.audit.details) std::cerr << "  " << d << '\n';
    if (result.audit.violations() > 0) return kExitRuntime;
  }
  return kExitOk;
}

int cmd_game(const CommonOptions& opt, const ScenarioOverrides& overrides, std::optional<int> turn_limit) {
  ScenarioConfig cfg = load_scenario(opt.config, overrides);
  if (turn_limit) cfg.game.turn_limit = *turn_limit;
  cfg.game.jobs = opt.jobs;
  const PreparedScenario prepared = prepare(cfg);
  validate(cfg.sim, *prepared.router);
  std::vector<OperatorParams> initial;
  for (const auto& oc : cfg.sim.operators) {
    initial.push_back({oc.fleet_size, oc.distance_cost_per_m, oc.time_value_per_s});
  }
  const GameResult game = run_game(initial, cfg.game, simulation_evaluator(cfg.sim, prepared.input()));

  Manifest m = start_manifest("game", opt.config, cfg, output_dir(opt.out));
  emit(m, "game_history.csv", [&](std::ostream& out) { write_game_history_csv(out, game); });
  emit(m, "game_final.json", [&](std::ostream& out) { write_game_json(out, game); });
  if (!game.converged() && cfg.game.turn_limit > 0) m.warnings.push_back("non_converged");
  m.write();
  std::cout << fmt::format("game finished after {} turns: {}\n", game.turns.size(), to_string(game.termination));
  for (std::size_t o = 0; o < game.final_params.size(); ++o) {
    const OperatorParams& p = game.final_params[o];
    std::cout << fmt::format("operator {}: fleet {} c_dis {} EUR/km c_vot {} EUR/h\n", o, p.fleet_size,
                             p.distance_cost_per_m * 1000.0, p.time_value_per_s * 3600.0);
  }
  return kExitOk;
}

int cmd_calibrate(const CommonOptions& opt, const ScenarioOverrides& overrides, std::optional<double> target) {
  ScenarioConfig cfg = load_scenario(opt.config, overrides);
  if (target) cfg.calibration.target_service_rate = *target;
  if (cfg.calibration_fleet_sizes.empty()) {
    throw ConfigError(fmt::format("{}: calibration.fleet_sizes is required for calibrate", opt.config));
  }
  const PreparedScenario prepared = prepare(cfg);
  validate(cfg.sim, *prepared.router);
  std::vector<SweepRow> sweep =
      sweep_fleet_sizes(cfg.sim, prepared.input(), cfg.calibration_fleet_sizes, opt.jobs);

  Manifest m = start_manifest("calibrate", opt.config, cfg, output_dir(opt.out));
  try {
    const CalibrationResult cal = calibrate(sweep, cfg.sim.econ, cfg.calibration);
    emit(m, "sweep.csv", [&](std::ostream& out) { write_sweep_csv(out, sweep); });
    emit(m, "calibration.json",
         [&](std::ostream& out) { write_calibration_json(out, cal, cfg.calibration.target_service_rate); });
    m.write();
    std::cout << fmt::format("fleet_size={} fare_eur_per_km={} no_offer_penalty_eur={}\n", cal.fleet_size,
                             cal.fare_per_m * 1000.0, cal.no_offer_penalty);
    return kExitOk;
  } catch (const CalibrationError& e) {
    emit(m, "sweep.csv", [&](std::ostream& out) { write_sweep_csv(out, sweep); });
    m.warnings.push_back(e.what());
    m.write();
    std::cerr << "calibration failed: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_gen_demand(const std::string& nodes_path, double rate, double horizon, std::uint64_t seed,
                   const std::string& out_path) {
  std::ifstream in(nodes_path);
  if (!in) throw LoadError(fmt::format("{}: file not found", nodes_path));
  const CsvTable table = CsvTable::parse(in, nodes_path);
  const auto c_id = table.require_column("node_id");
  std::vector<NodeId> nodes;
  for (const auto& row : table.rows()) nodes.push_back(table.integer(row, c_id));
  std::sort(nodes.begin(), nodes.end());
  const auto trips = generate_synthetic_demand(nodes, rate, horizon, seed);
  if (out_path.empty() || out_path == "-") {
    write_trip_records(std::cout, trips);
  } else {
    auto out = open_output(out_path);
    write_trip_records(out, trips);
  }
  return kExitOk;
}

int cmd_gen_network(const GridSpec& spec, const std::string& dir) {
  write_network_tables(dir, make_grid_network(spec));
  return kExitOk;
}

int cmd_validate(const std::string& config_path) {
  const ScenarioConfig cfg = load_scenario(config_path);
  const PreparedScenario prepared = prepare(cfg);
  validate(cfg.sim, *prepared.router);
  std::cout << fmt::format("ok: {} nodes, {} edges, {} requests, {} operators, scenario {}\n",
                           prepared.network->node_count(), prepared.network->edge_count(), prepared.requests.size(),
                           cfg.sim.operators.size(), to_string(cfg.sim.scenario));
  return kExitOk;
}

int cmd_replay(const std::string& log_path, const std::string& check_path) {
  std::ifstream in(log_path, std::ios::binary);
  if (!in) throw LoadError(fmt::format("{}: file not found", log_path));
  const SimulationResult result = replay_event_log(in);
  std::ostringstream csv;
  write_kpi_csv(csv, compute_kpis(result));
  std::cout << csv.str();
  if (check_path.empty()) return kExitOk;
  std::ifstream expected_in(check_path, std::ios::binary);
  if (!expected_in) throw LoadError(fmt::format("{}: file not found", check_path));
  std::ostringstream expected;
  expected << expected_in.rdbuf();
  if (expected.str() != csv.str()) {
    std::cerr << "replay: KPIs differ from " << check_path << '\n';
    return kExitRuntime;
  }
  std::cerr << "replay: KPIs match " << check_path << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-operator ridepooling market simulator"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  CommonOptions common;
  std::uint64_t seed = 0;
  std::string scenario;
  int fleet_size = 0;
  bool audit = false;
  std::string phase;

  auto* sim = app.add_subcommand("simulate", "Run one simulation and write events, KPIs and a manifest");
  sim->add_option("-c,--config", common.config, "Scenario file")->required();
  sim->add_option("-o,--out", common.out, "Output directory (default $RIDEPOOL_OUTPUT_DIR or ./ridepool-out)");
  auto* sim_seed = sim->add_option("--seed", seed, "Master seed override");
  auto* sim_scen = sim->add_option("--scenario", scenario, "Scenario kind override");
  auto* sim_fleet = sim->add_option("--fleet-size", fleet_size, "Fleet size for every operator");
  sim->add_option("--phase", phase, "Phase label written to the KPI table");
  sim->add_flag("--audit", audit, "Check every schedule and delivery against the constraints");

  std::optional<int> turn_limit;
  auto* game = app.add_subcommand("game", "Play the best-response game and write its history");
  game->add_option("-c,--config", common.config, "Scenario file")->required();
  game->add_option("-o,--out", common.out, "Output directory");
  game->add_option("-j,--jobs", common.jobs, "Parallel grid-cell simulations")->check(CLI::PositiveNumber);
  auto* game_seed = game->add_option("--seed", seed, "Master seed override");
  game->add_option("--turn-limit", turn_limit, "Override game.turn_limit");

  std::optional<double> target;
  auto* cal = app.add_subcommand("calibrate", "Sweep fleet sizes and derive fare and no-offer penalty");
  cal->add_option("-c,--config", common.config, "Scenario file")->required();
  cal->add_option("-o,--out", common.out, "Output directory");
  cal->add_option("-j,--jobs", common.jobs, "Parallel sweep simulations")->check(CLI::PositiveNumber);
  auto* cal_seed = cal->add_option("--seed", seed, "Master seed override");
  cal->add_option("--target-rate", target, "Target service rate")->check(CLI::Range(0.0, 1.0));

  std::string nodes_path, demand_out;
  double rate = 60.0, horizon = 3600.0;
  std::uint64_t demand_seed = 1;
  auto* gen = app.add_subcommand("gen-demand", "Generate Poisson requests with uniform origins and destinations");
  gen->add_option("--nodes", nodes_path, "Nodes table (node_id,x,y)")->required();
  gen->add_option("--rate-per-hour", rate, "Mean requests per hour")->check(CLI::NonNegativeNumber);
  gen->add_option("--horizon-s", horizon, "Horizon in seconds")->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", demand_seed, "Seed");
  gen->add_option("-o,--out", demand_out, "Output file (default stdout)");

  GridSpec grid;
  std::string grid_dir = "network";
  auto* gen_net = app.add_subcommand("gen-network", "Write a synthetic grid network");
  gen_net->add_option("--rows", grid.rows, "Grid rows");
  gen_net->add_option("--cols", grid.cols, "Grid columns");
  gen_net->add_option("--spacing-m", grid.spacing_m, "Node spacing in meters");
  gen_net->add_option("--speed-mps", grid.speed_mps, "Free-flow speed");
  gen_net->add_option("--zone-rows", grid.zone_rows, "Zone blocks per column");
  gen_net->add_option("--zone-cols", grid.zone_cols, "Zone blocks per row");
  gen_net->add_option("-o,--out-dir", grid_dir, "Output directory");

  std::string validate_path;
  auto* val = app.add_subcommand("validate", "Check a scenario file and its inputs");
  val->add_option("config", validate_path, "Scenario file")->required();

  std::string log_path, check_path;
  auto* rep = app.add_subcommand("replay", "Recompute KPIs from an event log");
  rep->add_option("--log", log_path, "Event log (NDJSON)")->required();
  rep->add_option("--check", check_path, "KPI CSV that must match exactly");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (sim->parsed()) {
      return cmd_simulate(common, make_overrides(sim_seed, seed, sim_scen, scenario, sim_fleet, fleet_size), audit,
                          phase);
    }
    if (game->parsed()) return cmd_game(common, make_overrides(game_seed, seed, nullptr, {}, nullptr, 0), turn_limit);
    if (cal->parsed()) return cmd_calibrate(common, make_overrides(cal_seed, seed, nullptr, {}, nullptr, 0), target);
    if (gen->parsed()) return cmd_gen_demand(nodes_path, rate, horizon, demand_seed, demand_out);
    if (gen_net->parsed()) return cmd_gen_network(grid, grid_dir);
    if (val->parsed()) return cmd_validate(validate_path);
    if (rep->parsed()) return cmd_replay(log_path, check_path);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const LoadError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
