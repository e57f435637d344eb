#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ridepool/demand.hpp"
#include "ridepool/game.hpp"
#include "ridepool/network.hpp"
#include "ridepool/simulation.hpp"
#include "ridepool/synthetic.hpp"

namespace ridepool {

struct SyntheticDemandSpec {
  double rate_per_hour = 60.0;
  std::uint64_t seed = 0;
};

/// Parsed scenario file. Relative paths are resolved against the file's directory.
struct ScenarioConfig {
  std::filesystem::path source;
  std::string text;

  SimulationConfig sim;

  std::optional<GridSpec> grid;
  std::filesystem::path nodes_path, edges_path, zones_path, profile_path;

  std::filesystem::path requests_path;
  std::optional<SyntheticDemandSpec> synthetic_demand;
  double subsample_rate = 1.0;
  std::uint64_t subsample_seed = 0;
  bool forecast_enabled = true;
  double forecast_penetration = 1.0;
  SpeedFilter speed_filter;

  GameSettings game;
  std::vector<int> calibration_fleet_sizes;
  CalibrationSettings calibration;
};

/// Command-line values replacing the file's settings.
struct ScenarioOverrides {
  std::optional<std::uint64_t> seed;  // seeds derived from the master seed follow it
  std::optional<std::string> scenario;
  std::optional<int> fleet_size;      // applied to every operator

  std::string describe() const;
};

/// Throws ConfigError with `file:line:` anchored messages.
ScenarioConfig parse_scenario(const std::string& text, const std::filesystem::path& source,
                              const ScenarioOverrides& overrides = {});
ScenarioConfig load_scenario(const std::filesystem::path& path, const ScenarioOverrides& overrides = {});

/// Network, router, requests and forecast materialized from a scenario.
struct PreparedScenario {
  std::unique_ptr<Network> network;
  std::unique_ptr<Router> router;
  std::vector<Request> requests;
  std::optional<Forecast> forecast;
  std::vector<NodeId> start_nodes;
  IngestStats ingest;

  SimulationInput input() const;
};

/// Loads files (LoadError on bad inputs) and builds the per-operator forecast.
PreparedScenario prepare(const ScenarioConfig& config);

}  // namespace ridepool
