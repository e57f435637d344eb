#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ridepool/config.hpp"
#include "ridepool/simulation.hpp"

namespace ridepool::fixtures {

/// Grid network with Poisson demand, written as a scenario file.
struct GridScenario {
  std::string scenario = "single";
  int rows = 4;
  int cols = 5;
  double spacing_m = 200.0;
  double speed_mps = 10.0;
  int zone_rows = 2;
  int zone_cols = 2;
  double rate_per_hour = 120.0;
  double horizon_s = 3000.0;
  std::uint64_t seed = 1;
  std::vector<int> fleets{4};
  int capacity = 4;
  double max_wait_s = 360.0;
  double max_detour_rel = 0.4;
  bool forecast = true;
  bool audit = true;
  /// Appended verbatim (game or calibration sections).
  std::string extra;
};

std::string to_yaml(const GridScenario& s);

struct Loaded {
  ScenarioConfig config;
  PreparedScenario prepared;

  SimulationInput input() const { return prepared.input(); }
  SimulationResult run() const { return ridepool::run(config.sim, input()); }
};

std::unique_ptr<Loaded> load(const GridScenario& s, const ScenarioOverrides& overrides = {});
std::unique_ptr<Loaded> load_text(const std::string& yaml, const ScenarioOverrides& overrides = {});

}  // namespace ridepool::fixtures
