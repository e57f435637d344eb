#include "ridepool/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <queue>

#include <fmt/format.h>

#include "ridepool/csv.hpp"
#include "ridepool/error.hpp"

namespace ridepool {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool within_tie(double candidate, double best) {
  return candidate <= best + 1e-9 * std::max(1.0, std::abs(best));
}

}  // namespace

// ---------------------------------------------------------------------------
// TravelTimeProfile

TravelTimeProfile::TravelTimeProfile(double interval_s, std::vector<double> factors)
    : interval_s_(interval_s), factors_(std::move(factors)) {
  if (!(interval_s_ > 0.0)) throw LoadError("travel-time profile: interval length must be positive");
  if (factors_.empty()) throw LoadError("travel-time profile: no intervals");
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (!(factors_[i] > 0.0)) {
      throw LoadError(fmt::format("travel-time profile: interval {} has nonpositive factor {}", i, factors_[i]));
    }
  }
}

TravelTimeProfile TravelTimeProfile::from_rows(std::span<const std::pair<double, double>> rows) {
  if (rows.empty()) throw LoadError("travel-time profile: no rows");
  if (rows.front().first != 0.0) throw LoadError("travel-time profile: first interval must start at 0");
  double interval = 900.0;
  if (rows.size() > 1) interval = rows[1].first - rows[0].first;
  std::vector<double> factors;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double expected = interval * static_cast<double>(i);
    if (std::abs(rows[i].first - expected) > 1e-9) {
      throw LoadError(fmt::format("travel-time profile: row {} starts at {} but {} expected (intervals must be contiguous and equal)",
                                  i + 1, rows[i].first, expected));
    }
    factors.push_back(rows[i].second);
  }
  return TravelTimeProfile(interval, std::move(factors));
}

TravelTimeProfile TravelTimeProfile::load(std::istream& in, const std::string& source_name) {
  const CsvTable table = CsvTable::parse(in, source_name);
  const auto c_start = table.require_column("interval_start_s");
  const auto c_factor = table.require_column("scale_factor");
  std::vector<std::pair<double, double>> rows;
  for (const auto& row : table.rows()) {
    const double factor = table.number(row, c_factor);
    if (!(factor > 0.0)) throw LoadError(fmt::format("{}: row {}: scale factor must be positive", source_name, row.line));
    rows.emplace_back(table.number(row, c_start), factor);
  }
  return from_rows(rows);
}

std::size_t TravelTimeProfile::interval_index(double t) const {
  if (t <= 0.0) return 0;
  return static_cast<std::size_t>(std::floor(t / interval_s_));
}

double TravelTimeProfile::factor_at(double t) const {
  return factors_[std::min(interval_index(t), factors_.size() - 1)];
}

// ---------------------------------------------------------------------------
// Network

Network::Network(std::vector<Node> nodes, std::vector<Edge> edges, std::vector<std::pair<NodeId, ZoneId>> zones)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  if (nodes_.empty()) throw LoadError("network has no nodes");
  std::sort(nodes_.begin(), nodes_.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i].id, i).second) throw LoadError(fmt::format("duplicate node {}", nodes_[i].id));
  }
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Edge& edge = edges_[e];
    if (!contains(edge.from)) throw LoadError(fmt::format("edge {}: unknown node {}", e + 1, edge.from));
    if (!contains(edge.to)) throw LoadError(fmt::format("edge {}: unknown node {}", e + 1, edge.to));
    if (!(edge.length_m > 0.0)) throw LoadError(fmt::format("edge {}: nonpositive length {}", e + 1, edge.length_m));
    if (!(edge.travel_time_s > 0.0)) throw LoadError(fmt::format("edge {}: nonpositive travel time {}", e + 1, edge.travel_time_s));
  }
  node_zone_.assign(nodes_.size(), 0);
  if (!zones.empty()) {
    std::vector<bool> seen(nodes_.size(), false);
    for (const auto& [node, zone] : zones) {
      const auto it = index_.find(node);
      if (it == index_.end()) throw LoadError(fmt::format("zone mapping: unknown node {}", node));
      node_zone_[it->second] = zone;
      seen[it->second] = true;
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!seen[i]) throw LoadError(fmt::format("zone mapping: node {} has no zone", nodes_[i].id));
    }
  }
  zone_list_ = node_zone_;
  std::sort(zone_list_.begin(), zone_list_.end());
  zone_list_.erase(std::unique(zone_list_.begin(), zone_list_.end()), zone_list_.end());

  build_adjacency();
  check_strong_connectivity();
}

void Network::build_adjacency() {
  // Collapse parallel edges: keep the fastest, ties by shorter length.
  std::map<std::pair<std::uint32_t, std::uint32_t>, Arc> best;
  for (const Edge& e : edges_) {
    const std::uint32_t u = index_.at(e.from);
    const std::uint32_t w = index_.at(e.to);
    if (u == w) continue;
    const Arc arc{w, e.length_m, e.travel_time_s};
    auto [it, inserted] = best.emplace(std::make_pair(u, w), arc);
    if (!inserted) {
      Arc& cur = it->second;
      if (arc.time_s < cur.time_s || (arc.time_s == cur.time_s && arc.length_m < cur.length_m)) cur = arc;
    }
  }
  const std::size_t n = nodes_.size();
  out_offsets_.assign(n + 1, 0);
  in_offsets_.assign(n + 1, 0);
  for (const auto& [key, arc] : best) {
    ++out_offsets_[key.first + 1];
    ++in_offsets_[key.second + 1];
  }
  std::partial_sum(out_offsets_.begin(), out_offsets_.end(), out_offsets_.begin());
  std::partial_sum(in_offsets_.begin(), in_offsets_.end(), in_offsets_.begin());
  eligible_.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    eligible_[i] = out_offsets_[i + 1] > out_offsets_[i] && in_offsets_[i + 1] > in_offsets_[i];
  }
  out_arcs_.resize(best.size());
  in_arcs_.resize(best.size());
  std::vector<std::size_t> out_fill(out_offsets_.begin(), out_offsets_.end() - 1);
  std::vector<std::size_t> in_fill(in_offsets_.begin(), in_offsets_.end() - 1);
  // Map iteration is ordered by (tail, head), so both lists end up sorted.
  for (const auto& [key, arc] : best) {
    out_arcs_[out_fill[key.first]++] = arc;
    in_arcs_[in_fill[key.second]++] = Arc{key.first, arc.length_m, arc.time_s};
  }
}

void Network::check_strong_connectivity() const {
  const std::size_t n = nodes_.size();
  const auto first = std::find(eligible_.begin(), eligible_.end(), true);
  if (first == eligible_.end()) return;
  const auto root = static_cast<std::uint32_t>(first - eligible_.begin());
  auto reach = [&](bool forward) {
    std::vector<bool> seen(n, false);
    std::vector<std::uint32_t> stack{root};
    seen[root] = true;
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (const Arc& a : forward ? out_arcs(u) : in_arcs(u)) {
        if (!seen[a.head]) {
          seen[a.head] = true;
          stack.push_back(a.head);
        }
      }
    }
    return seen;
  };
  const auto fwd = reach(true);
  const auto bwd = reach(false);
  const NodeId r = nodes_[root].id;
  for (std::size_t i = 0; i < n; ++i) {
    if (!eligible_[i]) continue;
    if (!fwd[i]) throw LoadError(fmt::format("demand subgraph is not strongly connected: node {} unreachable from node {}", nodes_[i].id, r));
    if (!bwd[i]) throw LoadError(fmt::format("demand subgraph is not strongly connected: node {} cannot reach node {}", nodes_[i].id, r));
  }
}

std::vector<NodeId> Network::demand_nodes() const {
  std::vector<NodeId> ids;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (eligible_[i]) ids.push_back(nodes_[i].id);
  }
  return ids;
}

bool Network::demand_eligible(NodeId id) const { return eligible_[index_of(id)]; }

std::vector<NodeId> Network::node_ids() const {
  std::vector<NodeId> ids;
  ids.reserve(nodes_.size());
  for (const Node& n : nodes_) ids.push_back(n.id);
  return ids;
}

std::uint32_t Network::index_of(NodeId id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw LoadError(fmt::format("unknown node {}", id));
  return it->second;
}

std::span<const Network::Arc> Network::out_arcs(std::uint32_t index) const {
  return {out_arcs_.data() + out_offsets_[index], out_offsets_[index + 1] - out_offsets_[index]};
}

std::span<const Network::Arc> Network::in_arcs(std::uint32_t index) const {
  return {in_arcs_.data() + in_offsets_[index], in_offsets_[index + 1] - in_offsets_[index]};
}

ZoneId Network::zone_of(NodeId id) const { return node_zone_[index_of(id)]; }

std::vector<NodeId> Network::nodes_in_zone(ZoneId zone) const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (node_zone_[i] == zone) out.push_back(nodes_[i].id);
  }
  return out;
}

NodeId Network::zone_centroid(ZoneId zone) const {
  bool any_eligible = false;
  for (std::size_t i = 0; i < nodes_.size(); ++i) any_eligible |= node_zone_[i] == zone && eligible_[i];
  auto member = [&](std::size_t i) { return node_zone_[i] == zone && (eligible_[i] || !any_eligible); };
  double sx = 0, sy = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!member(i)) continue;
    sx += nodes_[i].x;
    sy += nodes_[i].y;
    ++count;
  }
  if (count == 0) throw LoadError(fmt::format("zone {} has no nodes", zone));
  const double cx = sx / static_cast<double>(count);
  const double cy = sy / static_cast<double>(count);
  NodeId best = 0;
  double best_d = kInf;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!member(i)) continue;
    const double d = std::hypot(nodes_[i].x - cx, nodes_[i].y - cy);
    if (d < best_d) {
      best_d = d;
      best = nodes_[i].id;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Loading

Network load_network(std::istream& nodes_in, std::istream& edges_in, std::istream* zones_in,
                     const std::string& source_prefix) {
  const CsvTable nodes_tbl = CsvTable::parse(nodes_in, source_prefix + " nodes");
  const auto c_id = nodes_tbl.require_column("node_id");
  const auto c_x = nodes_tbl.require_column("x");
  const auto c_y = nodes_tbl.require_column("y");
  std::vector<Node> nodes;
  std::unordered_map<NodeId, std::size_t> seen;
  for (const auto& row : nodes_tbl.rows()) {
    const Node node{nodes_tbl.integer(row, c_id), nodes_tbl.number(row, c_x), nodes_tbl.number(row, c_y)};
    if (!seen.emplace(node.id, row.line).second) {
      throw LoadError(fmt::format("{}: row {}: duplicate node {}", nodes_tbl.source(), row.line, node.id));
    }
    nodes.push_back(node);
  }

  const CsvTable edges_tbl = CsvTable::parse(edges_in, source_prefix + " edges");
  const auto c_from = edges_tbl.require_column("from_node");
  const auto c_to = edges_tbl.require_column("to_node");
  const auto c_len = edges_tbl.require_column("length_m");
  const auto c_tt = edges_tbl.require_column("travel_time_s");
  std::vector<Edge> edges;
  for (const auto& row : edges_tbl.rows()) {
    const Edge e{edges_tbl.integer(row, c_from), edges_tbl.integer(row, c_to), edges_tbl.number(row, c_len),
                 edges_tbl.number(row, c_tt)};
    for (NodeId endpoint : {e.from, e.to}) {
      if (!seen.contains(endpoint)) {
        throw LoadError(fmt::format("{}: row {}: unknown node {}", edges_tbl.source(), row.line, endpoint));
      }
    }
    if (!(e.length_m > 0.0)) {
      throw LoadError(fmt::format("{}: row {}: nonpositive length {}", edges_tbl.source(), row.line, e.length_m));
    }
    if (!(e.travel_time_s > 0.0)) {
      throw LoadError(fmt::format("{}: row {}: nonpositive travel time {}", edges_tbl.source(), row.line, e.travel_time_s));
    }
    edges.push_back(e);
  }

  std::vector<std::pair<NodeId, ZoneId>> zones;
  if (zones_in != nullptr) {
    const CsvTable zones_tbl = CsvTable::parse(*zones_in, source_prefix + " zones");
    const auto c_node = zones_tbl.require_column("node_id");
    const auto c_zone = zones_tbl.require_column("zone_id");
    for (const auto& row : zones_tbl.rows()) {
      const NodeId node = zones_tbl.integer(row, c_node);
      if (!seen.contains(node)) {
        throw LoadError(fmt::format("{}: row {}: unknown node {}", zones_tbl.source(), row.line, node));
      }
      zones.emplace_back(node, zones_tbl.integer(row, c_zone));
    }
  }
  return Network(std::move(nodes), std::move(edges), std::move(zones));
}

Network load_network_files(const std::string& nodes_path, const std::string& edges_path,
                           const std::string& zones_path) {
  std::ifstream nodes(nodes_path);
  if (!nodes) throw LoadError(fmt::format("{}: cannot open file", nodes_path));
  std::ifstream edges(edges_path);
  if (!edges) throw LoadError(fmt::format("{}: cannot open file", edges_path));
  std::ifstream zones;
  if (!zones_path.empty()) {
    zones.open(zones_path);
    if (!zones) throw LoadError(fmt::format("{}: cannot open file", zones_path));
  }
  return load_network(nodes, edges, zones_path.empty() ? nullptr : &zones, nodes_path);
}

// ---------------------------------------------------------------------------
// Shortest paths

DestinationTree build_destination_tree(const Network& network, std::uint32_t destination) {
  const std::size_t n = network.node_count();
  std::vector<double> dist(n, kInf);
  std::vector<bool> done(n, false);
  std::vector<std::uint32_t> settled;
  settled.reserve(n);
  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[destination] = 0.0;
  queue.emplace(0.0, destination);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (done[u]) continue;
    done[u] = true;
    settled.push_back(u);
    for (const auto& arc : network.in_arcs(u)) {
      const double nd = d + arc.time_s;
      if (nd < dist[arc.head]) {
        dist[arc.head] = nd;
        queue.emplace(nd, arc.head);
      }
    }
  }

  DestinationTree tree;
  tree.base_time_s.assign(n, kInf);
  tree.distance_m.assign(n, kInf);
  tree.next.assign(n, -1);
  tree.base_time_s[destination] = 0.0;
  tree.distance_m[destination] = 0.0;
  // Settled order is nondecreasing in distance and every successor is
  // strictly closer (edge times are positive), so it is settled earlier.
  for (const std::uint32_t u : settled) {
    if (u == destination) continue;
    for (const auto& arc : network.out_arcs(u)) {
      if (!done[arc.head]) continue;
      if (within_tie(arc.time_s + dist[arc.head], dist[u])) {
        // Arcs are sorted by head, so the first match has the smallest id.
        tree.next[u] = arc.head;
        tree.base_time_s[u] = arc.time_s + tree.base_time_s[arc.head];
        tree.distance_m[u] = arc.length_m + tree.distance_m[arc.head];
        break;
      }
    }
  }
  return tree;
}

PathResult shortest_path(const Network& network, const TravelTimeProfile& profile, NodeId origin,
                         NodeId destination, double query_time) {
  const std::uint32_t o = network.index_of(origin);
  const std::uint32_t d = network.index_of(destination);
  PathResult result;
  result.nodes.push_back(origin);
  if (o == d) return result;
  const DestinationTree tree = build_destination_tree(network, d);
  if (tree.next[o] < 0) throw NoPathError(fmt::format("no path from {} to {}", origin, destination));
  for (std::int64_t u = tree.next[o]; u >= 0; u = tree.next[u]) {
    result.nodes.push_back(network.id_at(static_cast<std::uint32_t>(u)));
    if (static_cast<std::uint32_t>(u) == d) break;
  }
  result.travel_time_s = profile.factor_at(query_time) * tree.base_time_s[o];
  result.distance_m = tree.distance_m[o];
  return result;
}

OdTable::OdTable(std::vector<NodeId> subset, double factor, std::vector<PathResult> entries)
    : subset_(std::move(subset)), factor_(factor), entries_(std::move(entries)) {
  for (std::size_t i = 0; i < subset_.size(); ++i) position_.emplace(subset_[i], i);
}

const PathResult& OdTable::at(NodeId origin, NodeId destination) const {
  const auto o = position_.find(origin);
  const auto d = position_.find(destination);
  if (o == position_.end() || d == position_.end()) {
    throw LoadError(fmt::format("OD pair ({}, {}) not in precomputed subset", origin, destination));
  }
  return entries_[o->second * subset_.size() + d->second];
}

OdTable precompute_od_table(const Network& network, std::span<const NodeId> subset,
                            const TravelTimeProfile& profile, std::size_t interval) {
  const double factor = profile.factors()[std::min(interval, profile.factors().size() - 1)];
  const std::size_t k = subset.size();
  std::vector<PathResult> entries(k * k);
  for (std::size_t j = 0; j < k; ++j) {
    const std::uint32_t d = network.index_of(subset[j]);
    const DestinationTree tree = build_destination_tree(network, d);
    for (std::size_t i = 0; i < k; ++i) {
      const std::uint32_t o = network.index_of(subset[i]);
      PathResult& r = entries[i * k + j];
      r.nodes.push_back(subset[i]);
      if (o == d) continue;
      if (tree.next[o] < 0) throw NoPathError(fmt::format("no path from {} to {}", subset[i], subset[j]));
      for (std::int64_t u = tree.next[o]; u >= 0; u = tree.next[u]) {
        r.nodes.push_back(network.id_at(static_cast<std::uint32_t>(u)));
        if (static_cast<std::uint32_t>(u) == d) break;
      }
      r.travel_time_s = factor * tree.base_time_s[o];
      r.distance_m = tree.distance_m[o];
    }
  }
  return OdTable({subset.begin(), subset.end()}, factor, std::move(entries));
}

Router::Router(const Network& network, TravelTimeProfile profile)
    : network_(&network), profile_(std::move(profile)), n_(network.node_count()) {
  base_time_.assign(n_ * n_, kInf);
  distance_.assign(n_ * n_, kInf);
  next_.assign(n_ * n_, -1);
  for (std::uint32_t d = 0; d < n_; ++d) {
    const DestinationTree tree = build_destination_tree(network, d);
    for (std::uint32_t o = 0; o < n_; ++o) {
      base_time_[slot(o, d)] = tree.base_time_s[o];
      distance_[slot(o, d)] = tree.distance_m[o];
      next_[slot(o, d)] = static_cast<std::int32_t>(tree.next[o]);
      if (std::isfinite(tree.distance_m[o])) diameter_m_ = std::max(diameter_m_, tree.distance_m[o]);
    }
  }
}

double Router::base_travel_time(NodeId origin, NodeId destination) const {
  const double t = base_time_[slot(network_->index_of(origin), network_->index_of(destination))];
  if (!std::isfinite(t)) throw NoPathError(fmt::format("no path from {} to {}", origin, destination));
  return t;
}

double Router::travel_time(NodeId origin, NodeId destination, double query_time) const {
  if (origin == destination) return 0.0;
  return profile_.factor_at(query_time) * base_travel_time(origin, destination);
}

double Router::distance(NodeId origin, NodeId destination) const {
  const double d = distance_[slot(network_->index_of(origin), network_->index_of(destination))];
  if (!std::isfinite(d)) throw NoPathError(fmt::format("no path from {} to {}", origin, destination));
  return d;
}

NodeId Router::next_hop(NodeId origin, NodeId destination) const {
  if (origin == destination) return origin;
  const auto nx = next_[slot(network_->index_of(origin), network_->index_of(destination))];
  if (nx < 0) throw NoPathError(fmt::format("no path from {} to {}", origin, destination));
  return network_->id_at(static_cast<std::uint32_t>(nx));
}

PathResult Router::path(NodeId origin, NodeId destination, double query_time) const {
  PathResult r;
  r.nodes.push_back(origin);
  if (origin == destination) return r;
  r.travel_time_s = travel_time(origin, destination, query_time);
  r.distance_m = distance(origin, destination);
  for (NodeId u = origin; u != destination;) {
    u = next_hop(u, destination);
    r.nodes.push_back(u);
  }
  return r;
}

}  // namespace ridepool
