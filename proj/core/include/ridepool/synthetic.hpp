#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ridepool/network.hpp"

namespace ridepool {

struct NetworkTables {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<std::pair<NodeId, ZoneId>> zones;
};

/// Rectangular street grid with two-way edges between orthogonal neighbours.
struct GridSpec {
  int rows = 4;
  int cols = 5;
  double spacing_m = 200.0;
  double speed_mps = 10.0;
  /// Zones are rectangular blocks of the grid.
  int zone_rows = 2;
  int zone_cols = 2;
};

/// Node ids are 1 + row * cols + col; zone ids count blocks row-major from 0.
NetworkTables make_grid_network(const GridSpec& spec);

/// Random strongly connected network: a directed ring plus random chords,
/// integer lengths in [50, 500] m and integer travel times at 5 to 15 m/s.
NetworkTables make_random_network(int nodes, int chords, std::uint64_t seed);

Network to_network(const NetworkTables& tables);

/// Writes nodes.csv, edges.csv and zones.csv into `dir`.
void write_network_tables(const std::string& dir, const NetworkTables& tables);

}  // namespace ridepool
