#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace fleetsim {

using NodeId = std::int64_t;

struct Node {
  NodeId id = 0;
  double x_m = 0.0;
  double y_m = 0.0;
};

struct Edge {
  std::int64_t id = 0;
  NodeId from = 0;
  NodeId to = 0;
  double length_m = 0.0;
  bool bidirectional = true;
};

/// Directed arc in the internal adjacency, addressed by dense node index.
struct Arc {
  std::size_t head = 0;
  double length_m = 0.0;
  std::int64_t edge_id = 0;
};

/// Immutable, validated road graph in planar meter coordinates.
///
/// Nodes are stored sorted by id, so the dense index order equals the id
/// order; routing tie-breaks rely on that.
class RoadNetwork {
 public:
  /// Validates endpoints, lengths and strong connectivity.
  /// Throws ParseError for structural problems and DisconnectedGraph when
  /// some node cannot reach (or be reached from) the main component.
  static RoadNetwork build(std::vector<Node> nodes, std::vector<Edge> edges);

  std::size_t node_count() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }

  bool contains(NodeId id) const { return index_.count(id) != 0; }
  /// Throws UnknownNode.
  std::size_t index_of(NodeId id) const;
  const Node& node_at(std::size_t index) const { return nodes_[index]; }
  const Node& node(NodeId id) const { return nodes_[index_of(id)]; }

  const std::vector<Arc>& out_arcs(std::size_t index) const { return out_[index]; }
  const std::vector<Arc>& in_arcs(std::size_t index) const { return in_[index]; }

  /// Shortest single arc from -> to, if the two nodes are adjacent.
  std::optional<Arc> arc_between(std::size_t from, std::size_t to) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::unordered_map<NodeId, std::size_t> index_;
  std::vector<std::vector<Arc>> out_;
  std::vector<std::vector<Arc>> in_;
};

struct Path {
  std::vector<NodeId> node_sequence;
  /// Length of each hop; size is node_sequence.size() - 1 (or 0).
  std::vector<double> legs_m;
  double total_length_m = 0.0;

  bool empty() const { return node_sequence.size() < 2; }
};

RoadNetwork parse_network(std::istream& in, const std::string& source = "<network>");
RoadNetwork load_network(const std::filesystem::path& file);

/// Minimum-length path. Among equal-length paths the lexicographically
/// smallest node sequence is returned. from == to yields an empty path.
Path shortest_path(const RoadNetwork& net, NodeId from, NodeId to);

/// Same value as shortest_path(...).total_length_m without building the path.
double network_distance(const RoadNetwork& net, NodeId from, NodeId to);

double euclidean_distance(const RoadNetwork& net, NodeId a, NodeId b);

/// Distances from every node to `target_index` (reverse Dijkstra).
std::vector<double> distances_to(const RoadNetwork& net, std::size_t target_index);

/// Distances from every node to the closest of `targets` (multi-source).
std::vector<double> distances_to_nearest(const RoadNetwork& net, const std::vector<std::size_t>& targets);

/// Engine-side query cache. Keeps reverse shortest-path trees per target so
/// that "distance from every vehicle to this restaurant" is one lookup.
/// Not thread-safe; each engine owns its own router.
class Router {
 public:
  explicit Router(std::shared_ptr<const RoadNetwork> net, std::size_t max_cached_trees = 4096);

  const RoadNetwork& network() const { return *net_; }
  const std::shared_ptr<const RoadNetwork>& network_ptr() const { return net_; }

  /// Distance from every node index to target.
  const std::vector<double>& to(NodeId target);
  double distance(NodeId from, NodeId to);
  Path path(NodeId from, NodeId to);

 private:
  std::shared_ptr<const RoadNetwork> net_;
  std::size_t max_cached_;
  std::unordered_map<std::size_t, std::vector<double>> trees_;
};

/// Walks the lexicographically smallest shortest path given the reverse
/// distance field toward `to`. Shared by shortest_path and Router.
Path walk_shortest_path(const RoadNetwork& net, std::size_t from, std::size_t to,
                        const std::vector<double>& dist_to_target);

}  // namespace fleetsim
