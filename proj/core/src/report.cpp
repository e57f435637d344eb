#include "ridepool/report.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>
#include <json.hpp>

#include "ridepool/error.hpp"

namespace ridepool {
namespace {

using nlohmann::ordered_json;

struct Accumulator {
  std::size_t requests = 0;
  std::size_t served = 0;
  double direct = 0.0;
  double wait = 0.0;
  double detour = 0.0;

  void add_served(const RequestOutcome& o) {
    ++served;
    direct += o.request.direct_distance_m;
    wait += o.pickup_s - o.request.time_s;
    detour += (o.dropoff_s - o.pickup_s - o.request.direct_time_s) / o.request.direct_time_s;
  }
};

void fill(KpiRow& row, const Accumulator& acc, double fleet_m) {
  row.requests = acc.requests;
  row.served = acc.served;
  row.served_frac = acc.requests > 0 ? static_cast<double>(acc.served) / static_cast<double>(acc.requests) : 0.0;
  row.served_direct_distance_m = acc.direct;
  row.fleet_distance_m = fleet_m;
  row.rsd = compute_rsd(acc.direct, fleet_m);
  row.rsd_defined = acc.direct > 0.0;
  if (acc.served > 0) {
    row.mean_wait_s = acc.wait / static_cast<double>(acc.served);
    row.mean_rel_detour = acc.detour / static_cast<double>(acc.served);
  }
}

std::string num(double v) { return fmt::format("{}", v); }

const ordered_json& field(const ordered_json& j, const char* name, std::size_t line) {
  const auto it = j.find(name);
  if (it == j.end()) throw LoadError(fmt::format("event log line {}: missing field '{}'", line, name));
  return *it;
}

}  // namespace

double compute_rsd(double served_direct_distance_m, double fleet_distance_m) {
  if (!(served_direct_distance_m > 0.0)) return 0.0;
  return (served_direct_distance_m - fleet_distance_m) / served_direct_distance_m;
}

double compute_rsd(const SimulationResult& result, std::optional<OperatorId> op) {
  const KpiReport k = compute_kpis(result);
  const KpiRow& row = op ? k.rows.at(static_cast<std::size_t>(*op)) : k.rows.back();
  return row.rsd;
}

Profit compute_profit(const SimulationResult& result, const EconParams& econ, OperatorId op) {
  double direct = 0.0;
  for (const RequestOutcome& o : result.outcomes) {
    if (o.op == op) direct += o.request.direct_distance_m;
  }
  const OperatorSummary& s = result.operators.at(static_cast<std::size_t>(op));
  return ridepool::compute_profit(direct, s.fleet_distance_m, s.fleet_size, result.header.horizon_s, econ);
}

KpiReport compute_kpis(const SimulationResult& result) {
  KpiReport report;
  report.config_fingerprint = result.header.config_fingerprint;
  report.seed = result.header.seed;
  const EconParams& econ = result.header.econ;
  const std::size_t n = result.operators.size();

  std::vector<Accumulator> per_op(n);
  Accumulator all;
  all.requests = result.outcomes.size();
  for (std::size_t o = 0; o < n; ++o) per_op[o].requests = result.operators[o].asked;
  for (const RequestOutcome& out : result.outcomes) {
    if (!out.op) continue;
    per_op.at(static_cast<std::size_t>(*out.op)).add_served(out);
    all.add_served(out);
  }

  KpiRow total;
  total.scenario = result.header.scenario;
  total.phase = result.header.phase;
  total.op = "all";
  double fleet_total = 0.0;
  double direct_total = 0.0;
  for (std::size_t o = 0; o < n; ++o) {
    const OperatorSummary& s = result.operators[o];
    KpiRow row;
    row.scenario = result.header.scenario;
    row.phase = result.header.phase;
    row.op = std::to_string(s.id);
    fill(row, per_op[o], s.fleet_distance_m);
    const Profit p = ridepool::compute_profit(per_op[o].direct, s.fleet_distance_m, s.fleet_size,
                                              result.header.horizon_s, econ);
    row.profit = p.profit;
    row.effective_profit = compute_effective_profit(p.profit, s.no_offer, econ.no_offer_penalty);
    row.n_no_offer = s.no_offer;
    total.profit += row.profit;
    total.effective_profit += row.effective_profit;
    total.n_no_offer += row.n_no_offer;
    fleet_total += s.fleet_distance_m;
    direct_total += per_op[o].direct;
    report.rows.push_back(std::move(row));
  }
  const double profit = total.profit, eff = total.effective_profit;
  const std::size_t no_offer = total.n_no_offer;
  all.direct = direct_total;
  fill(total, all, fleet_total);
  total.profit = profit;
  total.effective_profit = eff;
  total.n_no_offer = no_offer;
  report.rows.push_back(std::move(total));
  return report;
}

void write_kpi_csv(std::ostream& out, const KpiReport& report) {
  out << "# config_fingerprint=" << report.config_fingerprint << " seed=" << report.seed << '\n';
  out << "scenario,phase,operator,served_frac,profit_eur,eff_profit_eur,rsd,mean_wait_s,mean_rel_detour,fleet_km,"
         "n_no_offer\n";
  for (const KpiRow& r : report.rows) {
    out << r.scenario << ',' << r.phase << ',' << r.op << ',' << num(r.served_frac) << ',' << num(r.profit) << ','
        << num(r.effective_profit) << ',' << num(r.rsd) << ',' << num(r.mean_wait_s) << ',' << num(r.mean_rel_detour)
        << ',' << num(r.fleet_distance_m / 1000.0) << ',' << r.n_no_offer << '\n';
  }
}

void write_kpi_json(std::ostream& out, const KpiReport& report) {
  ordered_json j;
  j["config_fingerprint"] = report.config_fingerprint;
  j["seed"] = report.seed;
  ordered_json rows = ordered_json::array();
  for (const KpiRow& r : report.rows) {
    ordered_json row;
    row["scenario"] = r.scenario;
    row["phase"] = r.phase;
    row["operator"] = r.op;
    row["requests"] = r.requests;
    row["served"] = r.served;
    row["served_frac"] = r.served_frac;
    row["profit_eur"] = r.profit;
    row["eff_profit_eur"] = r.effective_profit;
    row["rsd"] = r.rsd;
    row["rsd_defined"] = r.rsd_defined;
    row["mean_wait_s"] = r.mean_wait_s;
    row["mean_rel_detour"] = r.mean_rel_detour;
    row["served_direct_km"] = r.served_direct_distance_m / 1000.0;
    row["fleet_km"] = r.fleet_distance_m / 1000.0;
    row["n_no_offer"] = r.n_no_offer;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  out << j.dump(2) << '\n';
}

SimulationResult replay_event_log(std::istream& in) {
  SimulationResult result;
  std::map<RequestId, std::size_t> index;
  bool have_header = false;
  std::string line;
  std::size_t line_no = 0;
  auto outcome = [&](RequestId id) -> RequestOutcome& {
    const auto it = index.find(id);
    if (it == index.end()) throw LoadError(fmt::format("event log line {}: unknown request {}", line_no, id));
    return result.outcomes[it->second];
  };
  auto op_summary = [&](const ordered_json& v) -> OperatorSummary& {
    const auto o = v.get<OperatorId>();
    if (o < 0 || static_cast<std::size_t>(o) >= result.operators.size()) {
      throw LoadError(fmt::format("event log line {}: unknown operator {}", line_no, o));
    }
    return result.operators[static_cast<std::size_t>(o)];
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(fmt::format("event log line {}: {}", line_no, e.what()));
    }
    try {
      const double t = field(j, "time", line_no).get<double>();
      const std::string kind = field(j, "kind", line_no).get<std::string>();
      const ordered_json& p = field(j, "payload", line_no);
      if (kind == "run") {
        RunHeader& h = result.header;
        h.scenario = field(p, "scenario", line_no).get<std::string>();
        h.phase = field(p, "phase", line_no).get<std::string>();
        h.horizon_s = field(p, "horizon_s", line_no).get<double>();
        h.step_s = field(p, "step_s", line_no).get<double>();
        h.repo_interval_s = field(p, "repo_interval_s", line_no).get<double>();
        h.seed = field(p, "seed", line_no).get<std::uint64_t>();
        h.fleet_sizes = field(p, "fleet_sizes", line_no).get<std::vector<int>>();
        h.econ.fare_per_m = field(p, "fare_per_m", line_no).get<double>();
        h.econ.vehicle_cost_per_day = field(p, "vehicle_cost_per_day", line_no).get<double>();
        h.econ.distance_cost_per_m = field(p, "distance_cost_per_m", line_no).get<double>();
        h.econ.no_offer_penalty = field(p, "no_offer_penalty", line_no).get<double>();
        h.config_fingerprint = field(p, "config_fingerprint", line_no).get<std::string>();
        for (std::size_t o = 0; o < h.fleet_sizes.size(); ++o) {
          result.operators.push_back(OperatorSummary{static_cast<OperatorId>(o), h.fleet_sizes[o], 0.0, 0, 0});
        }
        have_header = true;
        continue;
      }
      if (!have_header) throw LoadError(fmt::format("event log line {}: record before run header", line_no));
      if (kind == "request") {
        RequestOutcome o;
        o.request.id = field(p, "id", line_no).get<RequestId>();
        o.request.time_s = field(p, "request_time_s", line_no).get<double>();
        o.request.origin = field(p, "origin", line_no).get<NodeId>();
        o.request.destination = field(p, "destination", line_no).get<NodeId>();
        o.request.direct_distance_m = field(p, "direct_distance_m", line_no).get<double>();
        o.request.direct_time_s = field(p, "direct_time_s", line_no).get<double>();
        for (const auto& a : field(p, "asked", line_no)) {
          ++op_summary(a).asked;
          o.asked.push_back(a.get<OperatorId>());
        }
        if (index.contains(o.request.id)) {
          throw LoadError(fmt::format("event log line {}: duplicate request {}", line_no, o.request.id));
        }
        index[o.request.id] = result.outcomes.size();
        result.outcomes.push_back(std::move(o));
      } else if (kind == "offer") {
        outcome(field(p, "request", line_no).get<RequestId>()).offered.push_back(field(p, "op", line_no).get<OperatorId>());
      } else if (kind == "decision") {
        RequestOutcome& o = outcome(field(p, "request", line_no).get<RequestId>());
        for (OperatorId a : o.asked) {
          if (std::find(o.offered.begin(), o.offered.end(), a) == o.offered.end()) {
            ++result.operators.at(static_cast<std::size_t>(a)).no_offer;
          }
        }
        const ordered_json& op = field(p, "op", line_no);
        if (!op.is_null()) o.op = op.get<OperatorId>();
      } else if (kind == "pickup") {
        RequestOutcome& o = outcome(field(p, "request", line_no).get<RequestId>());
        o.pickup_s = t;
        o.vehicle = field(p, "vehicle", line_no).get<VehicleId>();
      } else if (kind == "dropoff") {
        RequestOutcome& o = outcome(field(p, "request", line_no).get<RequestId>());
        o.dropoff_s = t;
        o.vehicle = field(p, "vehicle", line_no).get<VehicleId>();
        result.end_time_s = std::max(result.end_time_s, t);
      } else if (kind == "move") {
        op_summary(field(p, "op", line_no)).fleet_distance_m += field(p, "length_m", line_no).get<double>();
      } else if (kind == "reopt") {
        ReoptRecord r;
        r.op = field(p, "op", line_no).get<OperatorId>();
        r.report.time_s = t;
        r.report.requests = field(p, "requests", line_no).get<std::size_t>();
        r.report.v2rbs = field(p, "v2rbs", line_no).get<std::size_t>();
        r.report.incumbent_objective = field(p, "incumbent_objective", line_no).get<double>();
        r.report.objective = field(p, "objective", line_no).get<double>();
        result.reopts.push_back(r);
      } else if (kind != "reposition") {
        throw LoadError(fmt::format("event log line {}: unknown kind '{}'", line_no, kind));
      }
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(fmt::format("event log line {}: {}", line_no, e.what()));
    }
  }
  if (!have_header) throw LoadError("event log has no run header");
  for (const RequestOutcome& o : result.outcomes) {
    if (o.op && (std::isnan(o.pickup_s) || std::isnan(o.dropoff_s))) {
      throw LoadError(fmt::format("event log: served request {} lacks pickup or dropoff", o.request.id));
    }
  }
  return result;
}

void write_game_history_csv(std::ostream& out, const GameResult& game) {
  out << "turn,active,level,fleet_step,fleet_size,c_dis_eur_per_km,c_vot_eur_per_h,profit_eur,eff_profit_eur,"
         "service_rate,chosen\n";
  for (const GameTurn& t : game.turns) {
    for (std::size_t i = 0; i < t.cells.size(); ++i) {
      const GameCell& c = t.cells[i];
      out << t.turn << ',' << t.active << ',' << t.level << ',' << t.fleet_step << ',' << c.params.fleet_size << ','
          << num(c.params.distance_cost_per_m * 1000.0) << ',' << num(c.params.time_value_per_s * 3600.0) << ','
          << num(c.metrics.profit) << ',' << num(c.metrics.effective_profit) << ',' << num(c.metrics.service_rate)
          << ',' << (i == t.chosen ? 1 : 0) << '\n';
    }
  }
}

void write_game_json(std::ostream& out, const GameResult& game) {
  ordered_json j;
  j["termination"] = std::string(to_string(game.termination));
  j["converged"] = game.converged();
  j["turns"] = game.turns.size();
  ordered_json params = ordered_json::array();
  for (const OperatorParams& p : game.final_params) {
    params.push_back(ordered_json{{"fleet_size", p.fleet_size},
                                  {"c_dis_eur_per_km", p.distance_cost_per_m * 1000.0},
                                  {"c_vot_eur_per_h", p.time_value_per_s * 3600.0}});
  }
  j["final_params"] = std::move(params);
  out << j.dump(2) << '\n';
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> sweep) {
  out << "fleet_size,service_rate,served_direct_km,fleet_km,n_no_offer,profit_eur,eff_profit_eur\n";
  for (const SweepRow& r : sweep) {
    double direct = 0.0, fleet = 0.0;
    for (double d : r.served_direct_distance_m) direct += d;
    for (double d : r.fleet_distance_m) fleet += d;
    out << r.fleet_size << ',' << num(r.service_rate) << ',' << num(direct / 1000.0) << ',' << num(fleet / 1000.0)
        << ',' << r.no_offer << ',' << num(r.profit) << ',' << num(r.effective_profit) << '\n';
  }
}

void write_calibration_json(std::ostream& out, const CalibrationResult& c, double target_service_rate) {
  ordered_json j;
  j["target_service_rate"] = target_service_rate;
  j["fleet_size"] = c.fleet_size;
  j["fare_eur_per_km"] = c.fare_per_m * 1000.0;
  j["no_offer_penalty_eur"] = c.no_offer_penalty;
  j["revenue_eur"] = c.revenue;
  j["profit_eur"] = c.profit;
  out << j.dump(2) << '\n';
}

std::string fingerprint(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace ridepool
