#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ridepool/types.hpp"

namespace ridepool {

struct Node {
  NodeId id = 0;
  double x = 0.0;  // meters
  double y = 0.0;
};

struct Edge {
  NodeId from = 0;
  NodeId to = 0;
  double length_m = 0.0;
  double travel_time_s = 0.0;
};

struct PathResult {
  double travel_time_s = 0.0;
  double distance_m = 0.0;
  std::vector<NodeId> nodes;
};

/// Piecewise-constant multiplicative scaling of all base edge travel times.
class TravelTimeProfile {
 public:
  /// Constant factor 1.0 with the default 900 s interval.
  TravelTimeProfile() = default;
  TravelTimeProfile(double interval_s, std::vector<double> factors);

  /// Rows of (interval_start_s, factor). Starts must be 0, k, 2k, ...
  static TravelTimeProfile from_rows(std::span<const std::pair<double, double>> rows);
  static TravelTimeProfile load(std::istream& in, const std::string& source_name);

  double interval_s() const { return interval_s_; }
  std::size_t interval_index(double t) const;
  /// Factor of the interval containing t; the last factor holds past the end.
  double factor_at(double t) const;
  const std::vector<double>& factors() const { return factors_; }

 private:
  double interval_s_ = 900.0;
  std::vector<double> factors_{1.0};
};

/// Directed road network with node coordinates and a node-to-zone mapping.
///
/// Nodes are stored sorted by id, so dense index order equals id order and
/// every id-based tie-break can be done on indices.
class Network {
 public:
  struct Arc {
    std::uint32_t head = 0;
    double length_m = 0.0;
    double time_s = 0.0;
  };

  /// Validates invariants and throws LoadError naming the offending item.
  /// An empty zone list puts every node into zone 0.
  Network(std::vector<Node> nodes, std::vector<Edge> edges,
          std::vector<std::pair<NodeId, ZoneId>> zones = {});

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::vector<NodeId> node_ids() const;

  bool contains(NodeId id) const { return index_.contains(id); }
  std::uint32_t index_of(NodeId id) const;
  NodeId id_at(std::uint32_t index) const { return nodes_[index].id; }

  /// Outgoing arcs sorted by head; parallel edges collapse to the fastest.
  std::span<const Arc> out_arcs(std::uint32_t index) const;
  std::span<const Arc> in_arcs(std::uint32_t index) const;

  /// Nodes with at least one incoming and one outgoing edge. Requests and
  /// vehicle starts are restricted to them, and they must be strongly connected.
  std::vector<NodeId> demand_nodes() const;
  bool demand_eligible(NodeId id) const;

  ZoneId zone_of(NodeId id) const;
  /// Distinct zone ids in ascending order.
  const std::vector<ZoneId>& zones() const { return zone_list_; }
  std::vector<NodeId> nodes_in_zone(ZoneId zone) const;
  /// Node closest to the mean coordinate of the zone's demand nodes (all its
  /// nodes if it has none); ties go to the smaller id.
  NodeId zone_centroid(ZoneId zone) const;

 private:
  void build_adjacency();
  void check_strong_connectivity() const;

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::unordered_map<NodeId, std::uint32_t> index_;
  std::vector<ZoneId> node_zone_;
  std::vector<bool> eligible_;
  std::vector<ZoneId> zone_list_;
  std::vector<std::size_t> out_offsets_, in_offsets_;
  std::vector<Arc> out_arcs_, in_arcs_;
};

/// Loads the three network tables (`node_id,x,y`, `from_node,to_node,length_m,
/// travel_time_s`, `node_id,zone_id`). Pass an empty zones stream pointer to
/// use a single zone.
Network load_network(std::istream& nodes, std::istream& edges, std::istream* zones,
                     const std::string& source_prefix = "network");
Network load_network_files(const std::string& nodes_path, const std::string& edges_path,
                           const std::string& zones_path = {});

/// Uncached query: one backward Dijkstra from the destination.
///
/// Minimizes travel time; among equal-time paths the node sequence is the
/// lexicographically smallest by node id. Throws NoPathError if unreachable.
PathResult shortest_path(const Network& network, const TravelTimeProfile& profile,
                         NodeId origin, NodeId destination, double query_time);

/// Shortest-path tree towards one destination under base travel times.
struct DestinationTree {
  std::vector<double> base_time_s;  // infinity if the node cannot reach the destination
  std::vector<double> distance_m;
  std::vector<std::int64_t> next;   // dense index of the next hop, -1 at destination or unreachable
};

DestinationTree build_destination_tree(const Network& network, std::uint32_t destination);

/// Precomputed origin-destination table over a node subset for one interval.
class OdTable {
 public:
  OdTable(std::vector<NodeId> subset, double factor, std::vector<PathResult> entries);

  const PathResult& at(NodeId origin, NodeId destination) const;
  std::size_t size() const { return subset_.size(); }
  double factor() const { return factor_; }

 private:
  std::vector<NodeId> subset_;
  std::unordered_map<NodeId, std::size_t> position_;
  double factor_;
  std::vector<PathResult> entries_;
};

OdTable precompute_od_table(const Network& network, std::span<const NodeId> subset,
                            const TravelTimeProfile& profile, std::size_t interval);

/// All-pairs lookup used by the simulation.
///
/// Trees towards every destination are built once at construction and are
/// immutable afterwards, so one Router can be shared across threads. Query
/// time selects the profile factor; the path structure is factor-invariant
/// because scaling is uniform.
class Router {
 public:
  Router(const Network& network, TravelTimeProfile profile);

  const Network& network() const { return *network_; }
  const TravelTimeProfile& profile() const { return profile_; }

  double factor_at(double t) const { return profile_.factor_at(t); }
  double travel_time(NodeId origin, NodeId destination, double query_time) const;
  double base_travel_time(NodeId origin, NodeId destination) const;
  double distance(NodeId origin, NodeId destination) const;
  /// Next node on the path to destination; origin itself if already there.
  NodeId next_hop(NodeId origin, NodeId destination) const;
  PathResult path(NodeId origin, NodeId destination, double query_time) const;

  /// Largest shortest-path distance over all ordered node pairs.
  double diameter_distance_m() const { return diameter_m_; }

 private:
  std::size_t slot(std::uint32_t o, std::uint32_t d) const { return static_cast<std::size_t>(d) * n_ + o; }

  const Network* network_;
  TravelTimeProfile profile_;
  std::size_t n_ = 0;
  std::vector<double> base_time_;
  std::vector<double> distance_;
  std::vector<std::int32_t> next_;
  double diameter_m_ = 0.0;
};

}  // namespace ridepool
