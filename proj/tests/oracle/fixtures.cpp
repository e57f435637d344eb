#include "fixtures.hpp"

#include <fmt/format.h>

namespace ridepool::fixtures {

std::string to_yaml(const GridScenario& s) {
  std::string out = fmt::format(
      "scenario: {}\n"
      "horizon_s: {}\n"
      "step_s: 60\n"
      "repo_interval_s: 900\n"
      "seed: {}\n"
      "audit: {}\n"
      "network:\n"
      "  grid: {{rows: {}, cols: {}, spacing_m: {}, speed_mps: {}, zone_rows: {}, zone_cols: {}}}\n"
      "demand:\n"
      "  synthetic: {{rate_per_hour: {}}}\n"
      "  forecast: {}\n"
      "operators:\n",
      s.scenario, s.horizon_s, s.seed, s.audit, s.rows, s.cols, s.spacing_m, s.speed_mps, s.zone_rows, s.zone_cols,
      s.rate_per_hour, s.forecast);
  for (int fleet : s.fleets) {
    out += fmt::format("  - {{fleet_size: {}, capacity: {}, max_wait_s: {}, max_detour_rel: {}}}\n", fleet,
                       s.capacity, s.max_wait_s, s.max_detour_rel);
  }
  out += s.extra;
  return out;
}

std::unique_ptr<Loaded> load_text(const std::string& yaml, const ScenarioOverrides& overrides) {
  auto l = std::make_unique<Loaded>();
  l->config = parse_scenario(yaml, "fixture.yaml", overrides);
  l->prepared = prepare(l->config);
  return l;
}

std::unique_ptr<Loaded> load(const GridScenario& s, const ScenarioOverrides& overrides) {
  return load_text(to_yaml(s), overrides);
}

}  // namespace ridepool::fixtures
