#include "ridepool/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "ridepool/broker.hpp"
#include "ridepool/error.hpp"
#include "ridepool/report.hpp"
#include "ridepool/rng.hpp"

namespace ridepool {
namespace {

constexpr std::uint64_t kSubsampleStream = 10;
constexpr std::uint64_t kDemandStream = 11;
constexpr std::uint64_t kStartStream = 100;

std::string where(const std::string& file, const YAML::Node& node) {
  const YAML::Mark m = node.Mark();
  if (m.line < 0) return file;
  return fmt::format("{}:{}", file, m.line + 1);
}

/// Typed access to one mapping; reports unknown keys and bad values with their line.
class Section {
 public:
  Section(YAML::Node node, std::string path, const std::string& file, const YAML::Node& parent_for_mark)
      : node_(std::move(node)), path_(std::move(path)), file_(file) {
    if (!node_.IsMap()) fail(parent_for_mark, "expected a mapping");
  }

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
    const std::string loc = where(file_, at.IsDefined() ? at : node_);
    if (path_.empty()) throw ConfigError(fmt::format("{}: {}", loc, msg));
    throw ConfigError(fmt::format("{}: {}: {}", loc, path_, msg));
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_[key].IsDefined() && !node_[key].IsNull();
  }

  YAML::Node raw(const std::string& key) {
    seen_.insert(key);
    return node_[key];
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    const YAML::Node v = node_[key];
    if (!v.IsDefined() || v.IsNull()) return fallback;
    return convert<T>(v, key);
  }

  template <class T>
  T require(const std::string& key) {
    seen_.insert(key);
    const YAML::Node v = node_[key];
    if (!v.IsDefined() || v.IsNull()) fail(node_, fmt::format("missing required key '{}'", key));
    return convert<T>(v, key);
  }

  template <class T>
  T convert(const YAML::Node& v, const std::string& key) const {
    if (!v.IsScalar()) fail(v, fmt::format("'{}' must be a scalar", key));
    try {
      return v.as<T>();
    } catch (const YAML::Exception&) {
      fail(v, fmt::format("invalid value '{}' for '{}'", v.Scalar(), key));
    }
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(node_[key], path_.empty() ? key : path_ + "." + key, file_, node_);
  }

  void finish() const {
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!seen_.contains(key)) fail(kv.first, fmt::format("unknown key '{}'", key));
    }
  }

  const std::string& path() const { return path_; }
  const std::string& file() const { return file_; }

 private:
  YAML::Node node_;
  std::string path_;
  const std::string& file_;
  std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

void check_positive(Section& s, const YAML::Node& at, double v, const std::string& what) {
  if (!(v > 0.0)) s.fail(at, fmt::format("'{}' must be positive", what));
}

OperatorConfig parse_operator(Section s, std::uint64_t master_seed, std::size_t index) {
  OperatorConfig oc;
  oc.fleet_size = s.require<int>("fleet_size");
  if (oc.fleet_size < 0) s.fail(s.raw("fleet_size"), "'fleet_size' must be >= 0");
  oc.distance_cost_per_m = s.get<double>("c_dis_eur_per_km", 0.25) / 1000.0;
  oc.time_value_per_s = s.get<double>("c_vot_eur_per_h", 16.2) / 3600.0;
  oc.constraints.capacity = s.get<int>("capacity", 4);
  if (oc.constraints.capacity < 1) s.fail(s.raw("capacity"), "'capacity' must be >= 1");
  oc.constraints.max_wait_s = s.get<double>("max_wait_s", 360.0);
  oc.constraints.max_detour_rel = s.get<double>("max_detour_rel", 0.4);
  oc.constraints.dwell_s = s.get<double>("dwell_s", 0.0);
  if (oc.constraints.max_wait_s < 0.0 || oc.constraints.max_detour_rel < 0.0 || oc.constraints.dwell_s < 0.0) {
    s.fail(YAML::Node(), "constraint bounds must be >= 0");
  }
  oc.start_seed = s.get<std::uint64_t>("start_seed", derive_seed(master_seed, kStartStream + index));
  s.finish();
  return oc;
}

}  // namespace

std::string ScenarioOverrides::describe() const {
  std::string out;
  if (seed) out += fmt::format("seed={};", *seed);
  if (scenario) out += fmt::format("scenario={};", *scenario);
  if (fleet_size) out += fmt::format("fleet_size={};", *fleet_size);
  return out;
}

ScenarioConfig parse_scenario(const std::string& text, const std::filesystem::path& source,
                              const ScenarioOverrides& overrides) {
  const std::string file = source.string();
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("{}:{}: {}", file, e.mark.line + 1, e.msg));
  }
  if (!root.IsMap()) throw ConfigError(fmt::format("{}: top level must be a mapping", file));

  ScenarioConfig cfg;
  cfg.source = source;
  cfg.text = text;
  const std::filesystem::path base = source.has_parent_path() ? source.parent_path() : std::filesystem::path(".");
  Section top(root, "", file, root);
  SimulationConfig& sim = cfg.sim;

  const YAML::Node scenario_node = top.raw("scenario");
  const std::string kind = top.require<std::string>("scenario");
  try {
    sim.scenario = parse_scenario_kind(overrides.scenario ? *overrides.scenario : kind);
  } catch (const ConfigError& e) {
    if (overrides.scenario) throw ConfigError(fmt::format("--scenario: {}", e.what()));
    top.fail(scenario_node, e.what());
  }
  sim.phase = top.get<std::string>("phase", "base");
  sim.horizon_s = top.require<double>("horizon_s");
  sim.step_s = top.get<double>("step_s", 60.0);
  sim.repo_interval_s = top.get<double>("repo_interval_s", 900.0);
  sim.seed = overrides.seed ? *overrides.seed : top.get<std::uint64_t>("seed", 1);
  top.raw("seed");
  sim.reoptimize = top.get<bool>("reoptimize", true);
  sim.reposition = top.get<bool>("reposition", true);
  sim.audit = top.get<bool>("audit", false);
  check_positive(top, top.raw("step_s"), sim.step_s, "step_s");
  check_positive(top, top.raw("repo_interval_s"), sim.repo_interval_s, "repo_interval_s");
  if (sim.horizon_s < 0.0) top.fail(top.raw("horizon_s"), "'horizon_s' must be >= 0");

  {
    Section net = top.child("network");
    if (net.has("grid")) {
      Section g = net.child("grid");
      GridSpec spec;
      spec.rows = g.get<int>("rows", spec.rows);
      spec.cols = g.get<int>("cols", spec.cols);
      spec.spacing_m = g.get<double>("spacing_m", spec.spacing_m);
      spec.speed_mps = g.get<double>("speed_mps", spec.speed_mps);
      spec.zone_rows = g.get<int>("zone_rows", spec.zone_rows);
      spec.zone_cols = g.get<int>("zone_cols", spec.zone_cols);
      g.finish();
      cfg.grid = spec;
      if (net.has("nodes") || net.has("edges")) net.fail(net.raw("nodes"), "give either 'grid' or 'nodes'/'edges'");
    } else {
      cfg.nodes_path = resolve(base, net.require<std::string>("nodes"));
      cfg.edges_path = resolve(base, net.require<std::string>("edges"));
      if (net.has("zones")) cfg.zones_path = resolve(base, net.get<std::string>("zones", ""));
    }
    if (net.has("profile")) cfg.profile_path = resolve(base, net.get<std::string>("profile", ""));
    net.finish();
  }

  {
    Section dem = top.child("demand");
    if (dem.has("synthetic")) {
      Section syn = dem.child("synthetic");
      SyntheticDemandSpec spec;
      spec.rate_per_hour = syn.require<double>("rate_per_hour");
      spec.seed = syn.get<std::uint64_t>("seed", derive_seed(sim.seed, kDemandStream));
      syn.finish();
      if (spec.rate_per_hour < 0.0) dem.fail(dem.raw("synthetic"), "'rate_per_hour' must be >= 0");
      cfg.synthetic_demand = spec;
      if (dem.has("requests")) dem.fail(dem.raw("requests"), "give either 'requests' or 'synthetic'");
    } else {
      cfg.requests_path = resolve(base, dem.require<std::string>("requests"));
    }
    cfg.subsample_rate = dem.get<double>("subsample_rate", 1.0);
    if (!(cfg.subsample_rate > 0.0 && cfg.subsample_rate <= 1.0)) {
      dem.fail(dem.raw("subsample_rate"), "'subsample_rate' must be in (0, 1]");
    }
    cfg.subsample_seed = dem.get<std::uint64_t>("subsample_seed", derive_seed(sim.seed, kSubsampleStream));
    cfg.forecast_enabled = dem.get<bool>("forecast", true);
    cfg.forecast_penetration = dem.get<double>("forecast_penetration", cfg.subsample_rate);
    if (dem.has("speed_filter")) {
      Section sf = dem.child("speed_filter");
      cfg.speed_filter.min_speed_mps = sf.get<double>("min_mps", cfg.speed_filter.min_speed_mps);
      cfg.speed_filter.max_speed_mps = sf.get<double>("max_mps", cfg.speed_filter.max_speed_mps);
      sf.finish();
    }
    dem.finish();
  }

  if (top.has("economics")) {
    Section e = top.child("economics");
    sim.econ.fare_per_m = e.get<double>("fare_eur_per_km", 0.43) / 1000.0;
    sim.econ.vehicle_cost_per_day = e.get<double>("vehicle_cost_eur_per_day", 25.0);
    sim.econ.distance_cost_per_m = e.get<double>("distance_cost_eur_per_km", 0.25) / 1000.0;
    sim.econ.no_offer_penalty = e.get<double>("no_offer_penalty_eur", 0.46);
    e.finish();
    if (sim.econ.fare_per_m < 0 || sim.econ.vehicle_cost_per_day < 0 || sim.econ.distance_cost_per_m < 0 ||
        sim.econ.no_offer_penalty < 0) {
      top.fail(top.raw("economics"), "economic parameters must be >= 0");
    }
  }

  {
    const YAML::Node ops = top.raw("operators");
    if (!ops.IsDefined() || !ops.IsSequence() || ops.size() == 0) {
      top.fail(ops.IsDefined() ? ops : root, "'operators' must be a non-empty list");
    }
    for (std::size_t k = 0; k < ops.size(); ++k) {
      OperatorConfig oc = parse_operator(Section(ops[k], fmt::format("operators[{}]", k), file, ops), sim.seed, k);
      oc.fare_per_m = sim.econ.fare_per_m;
      if (overrides.fleet_size) {
        if (*overrides.fleet_size < 0) throw ConfigError("--fleet-size must be >= 0");
        oc.fleet_size = *overrides.fleet_size;
      }
      sim.operators.push_back(oc);
    }
    try {
      validate_operator_count(sim.scenario, sim.operators.size());
    } catch (const ConfigError& e) {
      top.fail(ops, e.what());
    }
  }

  if (top.has("assign")) {
    Section a = top.child("assign");
    sim.assign.max_bundles_per_vehicle = a.get<std::size_t>("max_bundles_per_vehicle", 0);
    a.finish();
  }

  cfg.game.objective_options = default_objective_options();
  if (top.has("game")) {
    Section g = top.child("game");
    GameSettings& gs = cfg.game;
    gs.turn_limit = g.get<int>("turn_limit", gs.turn_limit);
    gs.fleet_step = g.get<int>("fleet_step", gs.fleet_step);
    gs.fleet_count = g.get<int>("fleet_count", gs.fleet_count);
    gs.min_fleet_step = g.get<int>("min_fleet_step", gs.min_fleet_step);
    gs.objective_count = g.get<int>("objective_count", gs.objective_count);
    gs.vot_step_per_s = g.get<double>("vot_step_eur_per_h", gs.vot_step_per_s * 3600.0) / 3600.0;
    gs.min_vot_step_per_s = g.get<double>("min_vot_step_eur_per_h", gs.min_vot_step_per_s * 3600.0) / 3600.0;
    if (gs.turn_limit < 0) g.fail(g.raw("turn_limit"), "'turn_limit' must be >= 0");
    if (gs.fleet_step < 1 || gs.min_fleet_step < 1 || gs.fleet_count < 1 || gs.objective_count < 1) {
      g.fail(YAML::Node(), "fleet steps and axis counts must be >= 1");
    }
    const YAML::Node opts = g.raw("objective_options");
    if (opts.IsDefined()) {
      if (!opts.IsSequence()) g.fail(opts, "'objective_options' must be a list");
      gs.objective_options.clear();
      for (std::size_t k = 0; k < opts.size(); ++k) {
        Section o(opts[k], fmt::format("{}.objective_options[{}]", g.path(), k), file, opts);
        gs.objective_options.push_back(
            {o.require<double>("c_dis_eur_per_km") / 1000.0, o.require<double>("c_vot_eur_per_h") / 3600.0});
        o.finish();
      }
    }
    g.finish();
  }

  if (top.has("calibration")) {
    Section c = top.child("calibration");
    const YAML::Node sizes = c.raw("fleet_sizes");
    if (sizes.IsSequence()) {
      for (const auto& v : sizes) cfg.calibration_fleet_sizes.push_back(c.convert<int>(v, "fleet_sizes"));
    } else if (sizes.IsMap()) {
      Section r(sizes, c.path() + ".fleet_sizes", file, sizes);
      const int from = r.require<int>("from");
      const int to = r.require<int>("to");
      const int step = r.get<int>("step", 1);
      r.finish();
      if (step < 1 || from < 0 || to < from) c.fail(sizes, "fleet_sizes range needs 0 <= from <= to and step >= 1");
      for (int f = from; f <= to; f += step) cfg.calibration_fleet_sizes.push_back(f);
    } else if (sizes.IsDefined()) {
      c.fail(sizes, "'fleet_sizes' must be a list or a {from, to, step} mapping");
    }
    cfg.calibration.target_service_rate = c.get<double>("target_service_rate", 0.9);
    cfg.calibration.penalty_resolution = c.get<double>("penalty_resolution_eur", 0.01);
    cfg.calibration.penalty_max = c.get<double>("penalty_max_eur", 100.0);
    if (!(cfg.calibration.penalty_resolution > 0.0)) {
      c.fail(c.raw("penalty_resolution_eur"), "'penalty_resolution_eur' must be positive");
    }
    c.finish();
  }

  top.finish();
  sim.config_fingerprint = fingerprint(text + "\n--\n" + overrides.describe());
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path, const ScenarioOverrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("{}: cannot open scenario file", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str(), path, overrides);
}

SimulationInput PreparedScenario::input() const {
  SimulationInput in;
  in.router = router.get();
  in.requests = requests;
  in.forecast = forecast ? &*forecast : nullptr;
  in.start_nodes = start_nodes;
  return in;
}

PreparedScenario prepare(const ScenarioConfig& config) {
  PreparedScenario p;
  if (config.grid) {
    p.network = std::make_unique<Network>(to_network(make_grid_network(*config.grid)));
  } else {
    for (const auto& path : {config.nodes_path, config.edges_path}) {
      if (!std::filesystem::exists(path)) throw LoadError(fmt::format("{}: file not found", path.string()));
    }
    if (!config.zones_path.empty() && !std::filesystem::exists(config.zones_path)) {
      throw LoadError(fmt::format("{}: file not found", config.zones_path.string()));
    }
    p.network = std::make_unique<Network>(
        load_network_files(config.nodes_path.string(), config.edges_path.string(), config.zones_path.string()));
  }
  TravelTimeProfile profile;
  if (!config.profile_path.empty()) {
    std::ifstream in(config.profile_path);
    if (!in) throw LoadError(fmt::format("{}: file not found", config.profile_path.string()));
    profile = TravelTimeProfile::load(in, config.profile_path.string());
  }
  p.router = std::make_unique<Router>(*p.network, std::move(profile));
  p.start_nodes = p.network->demand_nodes();

  std::vector<TripRecord> trips;
  if (config.synthetic_demand) {
    if (config.synthetic_demand->rate_per_hour > 0.0) {
      trips = generate_synthetic_demand(p.start_nodes, config.synthetic_demand->rate_per_hour, config.sim.horizon_s,
                                        config.synthetic_demand->seed);
    }
  } else {
    if (!std::filesystem::exists(config.requests_path)) {
      throw LoadError(fmt::format("{}: file not found", config.requests_path.string()));
    }
    trips = read_trip_records_file(config.requests_path.string());
  }
  p.requests = ingest_requests(trips, *p.router, config.subsample_rate, config.subsample_seed, &p.ingest,
                               config.speed_filter);
  if (config.forecast_enabled) {
    const auto valid = filter_by_speed(trips, *p.router, config.speed_filter);
    p.forecast = build_forecast(valid, *p.network, config.forecast_penetration,
                                static_cast<int>(config.sim.operators.size()), config.sim.repo_interval_s,
                                config.sim.horizon_s);
  }
  return p;
}

}  // namespace ridepool
