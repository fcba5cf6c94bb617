#pragma once

#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "fleetsim/engine.hpp"
#include "fleetsim/network.hpp"
#include "fleetsim/random.hpp"
#include "fleetsim/scenario.hpp"

namespace fleetsim::testing {

inline const std::string kDeskDir = FLEETSIM_DESK_DIR;
inline const std::string kFixtureDir = FLEETSIM_FIXTURE_DIR;

inline RoadNetwork network_from(const std::string& text) {
  std::istringstream in(text);
  return parse_network(in);
}

/// Nodes 1..n on the x axis, consecutive ones joined by bidirectional edges.
inline RoadNetwork line_graph(int n, double edge_m) {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  for (int i = 1; i <= n; ++i) nodes.push_back({i, (i - 1) * edge_m, 0.0});
  for (int i = 1; i < n; ++i) edges.push_back({i, i, i + 1, edge_m, true});
  return RoadNetwork::build(nodes, edges);
}

/// Strongly connected random graph: a directed ring through all nodes plus
/// extra edges, some one-way. Integer lengths keep path sums exact.
inline RoadNetwork random_graph(Rng& rng, int n) {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) nodes.push_back({i + 1, rng.uniform(0, 5000), rng.uniform(0, 5000)});
  std::int64_t eid = 1;
  for (int i = 0; i < n; ++i) {
    edges.push_back({eid++, i + 1, (i + 1) % n + 1, static_cast<double>(1 + rng.index(1000)), rng.uniform() < 0.5});
  }
  const int extra = static_cast<int>(rng.index(static_cast<std::uint64_t>(2 * n))) + 1;
  for (int k = 0; k < extra; ++k) {
    const auto a = static_cast<NodeId>(rng.index(n) + 1);
    const auto b = static_cast<NodeId>(rng.index(n) + 1);
    if (a == b) continue;
    edges.push_back({eid++, a, b, static_cast<double>(1 + rng.index(1000)), rng.uniform() < 0.5});
  }
  return RoadNetwork::build(nodes, edges);
}

/// All-pairs distances by Floyd-Warshall over the edge list, indexed by
/// position in net.nodes().
inline std::vector<std::vector<double>> floyd_warshall(const RoadNetwork& net) {
  const std::size_t n = net.node_count();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const auto& e : net.edges()) {
    const auto a = net.index_of(e.from);
    const auto b = net.index_of(e.to);
    d[a][b] = std::min(d[a][b], e.length_m);
    if (e.bidirectional) d[b][a] = std::min(d[b][a], e.length_m);
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
      }
    }
  }
  return d;
}

inline ScenarioConfig desk_config() { return load_config(kDeskDir + "/desk.conf"); }

inline Vehicle idle_vehicle(VehicleId id, NodeId node, double battery_km) {
  Vehicle v;
  v.id = id;
  v.node = node;
  v.battery_km = battery_km;
  return v;
}

inline Order order(OrderId id, double t, NodeId restaurant, NodeId destination) {
  Order o;
  o.id = id;
  o.placed_at_s = t;
  o.restaurant_node = restaurant;
  o.destination_node = destination;
  return o;
}

/// Runs an engine to completion, finalizes and returns it.
inline void run_to_end(Engine& engine) {
  do {
    engine.tick();
  } while (!engine.finished());
  engine.finalize();
}

}  // namespace fleetsim::testing
