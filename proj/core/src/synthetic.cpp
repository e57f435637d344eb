#include "ridepool/synthetic.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "ridepool/error.hpp"
#include "ridepool/rng.hpp"

namespace ridepool {

NetworkTables make_grid_network(const GridSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1 || spec.rows * spec.cols < 2) throw ConfigError("grid needs at least 2 nodes");
  if (!(spec.spacing_m > 0.0) || !(spec.speed_mps > 0.0)) throw ConfigError("grid spacing and speed must be positive");
  if (spec.zone_rows < 1 || spec.zone_cols < 1) throw ConfigError("grid zone counts must be >= 1");
  NetworkTables t;
  auto id = [&](int r, int c) { return static_cast<NodeId>(1 + r * spec.cols + c); };
  const double time = spec.spacing_m / spec.speed_mps;
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      t.nodes.push_back(Node{id(r, c), c * spec.spacing_m, r * spec.spacing_m});
      const int zr = std::min(spec.zone_rows - 1, r * spec.zone_rows / spec.rows);
      const int zc = std::min(spec.zone_cols - 1, c * spec.zone_cols / spec.cols);
      t.zones.emplace_back(id(r, c), static_cast<ZoneId>(zr * spec.zone_cols + zc));
    }
  }
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      if (c + 1 < spec.cols) {
        t.edges.push_back(Edge{id(r, c), id(r, c + 1), spec.spacing_m, time});
        t.edges.push_back(Edge{id(r, c + 1), id(r, c), spec.spacing_m, time});
      }
      if (r + 1 < spec.rows) {
        t.edges.push_back(Edge{id(r, c), id(r + 1, c), spec.spacing_m, time});
        t.edges.push_back(Edge{id(r + 1, c), id(r, c), spec.spacing_m, time});
      }
    }
  }
  return t;
}

NetworkTables make_random_network(int nodes, int chords, std::uint64_t seed) {
  if (nodes < 2) throw ConfigError("random network needs at least 2 nodes");
  Rng rng(seed);
  NetworkTables t;
  for (int k = 0; k < nodes; ++k) {
    t.nodes.push_back(Node{k + 1, std::floor(rng.uniform() * 2000.0), std::floor(rng.uniform() * 2000.0)});
    t.zones.emplace_back(k + 1, static_cast<ZoneId>(k % 2));
  }
  auto edge = [&](NodeId a, NodeId b) {
    const double length = 50.0 + static_cast<double>(rng.below(451));
    const double speed = 5.0 + static_cast<double>(rng.below(11));
    return Edge{a, b, length, std::max(1.0, std::round(length / speed))};
  };
  std::set<std::pair<NodeId, NodeId>> used;
  for (int k = 0; k < nodes; ++k) {
    const NodeId a = k + 1, b = (k + 1) % nodes + 1;
    t.edges.push_back(edge(a, b));
    used.emplace(a, b);
  }
  for (int k = 0; k < chords; ++k) {
    const NodeId a = 1 + static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(nodes)));
    const NodeId b = 1 + static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(nodes)));
    if (a == b || !used.emplace(a, b).second) continue;
    t.edges.push_back(edge(a, b));
  }
  return t;
}

Network to_network(const NetworkTables& tables) { return Network(tables.nodes, tables.edges, tables.zones); }

void write_network_tables(const std::string& dir, const NetworkTables& tables) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(std::filesystem::path(dir) / name);
    if (!out) throw Error(fmt::format("cannot write {}/{}", dir, name));
    return out;
  };
  {
    auto out = open("nodes.csv");
    out << "node_id,x,y\n";
    for (const Node& n : tables.nodes) out << fmt::format("{},{},{}\n", n.id, n.x, n.y);
  }
  {
    auto out = open("edges.csv");
    out << "from_node,to_node,length_m,travel_time_s\n";
    for (const Edge& e : tables.edges) out << fmt::format("{},{},{},{}\n", e.from, e.to, e.length_m, e.travel_time_s);
  }
  {
    auto out = open("zones.csv");
    out << "node_id,zone_id\n";
    for (const auto& [n, z] : tables.zones) out << fmt::format("{},{}\n", n, z);
  }
}

}  // namespace ridepool
