#include "ridepool/repositioning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "ridepool/error.hpp"

namespace ridepool {
namespace {

struct FlowArc {
  std::size_t to;
  int cap;
  double cost;
  std::size_t rev;
};

class MinCostFlow {
 public:
  explicit MinCostFlow(std::size_t n) : graph_(n) {}

  std::size_t add_arc(std::size_t from, std::size_t to, int cap, double cost) {
    graph_[from].push_back({to, cap, cost, graph_[to].size()});
    graph_[to].push_back({from, 0, -cost, graph_[from].size() - 1});
    return graph_[from].size() - 1;
  }

  /// Pushes up to `limit` units from s to t along successive cheapest paths.
  double run(std::size_t s, std::size_t t, int limit) {
    const std::size_t n = graph_.size();
    double total = 0.0;
    while (limit > 0) {
      std::vector<double> dist(n, std::numeric_limits<double>::infinity());
      std::vector<std::size_t> prev_node(n, n), prev_arc(n, 0);
      dist[s] = 0.0;
      // Bellman-Ford; residual arcs carry negative costs.
      for (std::size_t iter = 0; iter + 1 < n; ++iter) {
        bool changed = false;
        for (std::size_t u = 0; u < n; ++u) {
          if (!std::isfinite(dist[u])) continue;
          for (std::size_t a = 0; a < graph_[u].size(); ++a) {
            const FlowArc& arc = graph_[u][a];
            if (arc.cap <= 0) continue;
            const double nd = dist[u] + arc.cost;
            if (nd < dist[arc.to] - 1e-12) {
              dist[arc.to] = nd;
              prev_node[arc.to] = u;
              prev_arc[arc.to] = a;
              changed = true;
            }
          }
        }
        if (!changed) break;
      }
      if (!std::isfinite(dist[t])) break;
      int push = limit;
      for (std::size_t v = t; v != s; v = prev_node[v]) push = std::min(push, graph_[prev_node[v]][prev_arc[v]].cap);
      for (std::size_t v = t; v != s; v = prev_node[v]) {
        FlowArc& arc = graph_[prev_node[v]][prev_arc[v]];
        arc.cap -= push;
        graph_[v][arc.rev].cap += push;
      }
      total += push * dist[t];
      limit -= push;
    }
    return total;
  }

  int flow_on(std::size_t from, std::size_t arc_index) const {
    const FlowArc& arc = graph_[from][arc_index];
    return graph_[arc.to][arc.rev].cap;
  }

 private:
  std::vector<std::vector<FlowArc>> graph_;
};

/// Scales `values` to sum to `total` by largest remainder (ties: lower index).
std::vector<int> scale_down(const std::vector<int>& values, int total) {
  const long long sum = std::accumulate(values.begin(), values.end(), 0LL);
  std::vector<int> out(values.size(), 0);
  if (sum <= 0 || total <= 0) return out;
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double exact = static_cast<double>(values[i]) * total / static_cast<double>(sum);
    out[i] = static_cast<int>(std::floor(exact));
    assigned += out[i];
    remainders.emplace_back(exact - out[i], i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total && k < remainders.size(); ++k, ++assigned) ++out[remainders[k].second];
  return out;
}

}  // namespace

TransportationPlan solve_transportation(std::span<const int> supply, std::span<const int> demand,
                                        const std::vector<std::vector<double>>& cost) {
  const std::size_t ns = supply.size();
  const std::size_t nd = demand.size();
  if (cost.size() != ns) throw ConfigError("transportation: cost rows must match supplies");
  const int total_supply = std::accumulate(supply.begin(), supply.end(), 0);
  const int total_demand = std::accumulate(demand.begin(), demand.end(), 0);
  if (total_demand > total_supply) throw ConfigError("transportation: demand exceeds supply");

  const std::size_t source = ns + nd;
  const std::size_t sink = source + 1;
  MinCostFlow mcf(sink + 1);
  std::vector<std::vector<std::size_t>> arc_ids(ns, std::vector<std::size_t>(nd));
  for (std::size_t i = 0; i < ns; ++i) {
    if (cost[i].size() != nd) throw ConfigError("transportation: cost columns must match demands");
    mcf.add_arc(source, i, supply[i], 0.0);
    for (std::size_t j = 0; j < nd; ++j) arc_ids[i][j] = mcf.add_arc(i, ns + j, total_demand, cost[i][j]);
  }
  for (std::size_t j = 0; j < nd; ++j) mcf.add_arc(ns + j, sink, demand[j], 0.0);

  TransportationPlan plan;
  mcf.run(source, sink, total_demand);
  plan.flow.assign(ns, std::vector<int>(nd, 0));
  for (std::size_t i = 0; i < ns; ++i) {
    for (std::size_t j = 0; j < nd; ++j) {
      plan.flow[i][j] = mcf.flow_on(i, arc_ids[i][j]);
      plan.cost += plan.flow[i][j] * cost[i][j];
    }
  }
  return plan;
}

std::vector<ZoneBalance> zone_balance(const OperatorState& state, const Forecast& forecast, double now) {
  const Network& net = state.router->network();
  std::vector<ZoneBalance> out;
  for (ZoneId z : net.zones()) out.push_back(ZoneBalance{z, 0, 0, 0.0, 0, 0});
  auto find = [&](ZoneId z) -> ZoneBalance& {
    return *std::find_if(out.begin(), out.end(), [z](const ZoneBalance& b) { return b.zone == z; });
  };
  for (const VehicleState& v : state.vehicles) {
    if (v.has_customers()) continue;
    if (v.reposition_target) {
      ++find(net.zone_of(*v.reposition_target)).idle;
    } else {
      ZoneBalance& b = find(net.zone_of(v.anchor(now).node));
      ++b.idle;
      ++b.movable;
    }
  }
  const std::size_t k = forecast.interval_s() > 0 ? static_cast<std::size_t>(std::floor(now / forecast.interval_s())) : 0;
  for (ZoneBalance& b : out) {
    const bool known = std::binary_search(forecast.zones().begin(), forecast.zones().end(), b.zone);
    const double dep = known ? forecast.departures(b.zone, k) : 0.0;
    const double arr = known ? forecast.arrivals(b.zone, k) : 0.0;
    b.need = std::max(0.0, dep - arr);
    const double surplus = b.idle - b.need;
    if (surplus > 0.0) {
      b.supply = std::min(b.movable, static_cast<int>(std::floor(surplus + 1e-9)));
    } else if (surplus < 0.0) {
      b.deficit = static_cast<int>(std::floor(-surplus + 0.5));
    }
  }
  return out;
}

std::vector<RepositionTask> reposition(OperatorState& state, const Forecast& forecast, double now) {
  const Router& router = *state.router;
  const Network& net = router.network();
  const auto balance = zone_balance(state, forecast, now);

  std::vector<const ZoneBalance*> sources, sinks;
  for (const auto& b : balance) {
    if (b.supply > 0) sources.push_back(&b);
    if (b.deficit > 0) sinks.push_back(&b);
  }
  if (sources.empty() || sinks.empty()) return {};

  std::vector<int> supply, deficit;
  for (const auto* b : sources) supply.push_back(b->supply);
  for (const auto* b : sinks) deficit.push_back(b->deficit);
  const int total_supply = std::accumulate(supply.begin(), supply.end(), 0);
  const int total_deficit = std::accumulate(deficit.begin(), deficit.end(), 0);
  if (total_deficit > total_supply) deficit = scale_down(deficit, total_supply);

  std::vector<std::vector<double>> cost(sources.size(), std::vector<double>(sinks.size()));
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const NodeId from = net.zone_centroid(sources[i]->zone);
    for (std::size_t j = 0; j < sinks.size(); ++j) {
      cost[i][j] = router.travel_time(from, net.zone_centroid(sinks[j]->zone), now);
    }
  }
  const TransportationPlan plan = solve_transportation(supply, deficit, cost);

  std::vector<RepositionTask> tasks;
  std::vector<bool> taken(state.vehicles.size(), false);
  for (std::size_t i = 0; i < sources.size(); ++i) {
    for (std::size_t j = 0; j < sinks.size(); ++j) {
      const NodeId target = net.zone_centroid(sinks[j]->zone);
      for (int unit = 0; unit < plan.flow[i][j]; ++unit) {
        const VehicleState* pick = nullptr;
        double pick_tt = std::numeric_limits<double>::infinity();
        for (const VehicleState& v : state.vehicles) {
          if (taken[static_cast<std::size_t>(v.id)] || v.has_customers() || v.reposition_target) continue;
          const Anchor a = v.anchor(now);
          if (net.zone_of(a.node) != sources[i]->zone) continue;
          const double tt = router.travel_time(a.node, target, now);
          if (tt < pick_tt) {
            pick_tt = tt;
            pick = &v;
          }
        }
        if (pick == nullptr) break;
        taken[static_cast<std::size_t>(pick->id)] = true;
        tasks.push_back(RepositionTask{pick->id, pick->anchor(now).node, target, sources[i]->zone, sinks[j]->zone});
      }
    }
  }
  for (const RepositionTask& t : tasks) state.vehicle(t.vehicle).reposition_target = t.target;
  if (!tasks.empty()) ++state.version;
  return tasks;
}

}  // namespace ridepool
