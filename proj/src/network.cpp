#include "fleetsim/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

#include "fleetsim/errors.hpp"
#include "text_util.hpp"

namespace fleetsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool same_length(double a, double b) {
  return std::fabs(a - b) <= 1e-9 * std::max(1.0, std::fabs(b));
}

// Kosaraju: returns component label per node index.
std::vector<std::size_t> strong_components(const std::vector<std::vector<Arc>>& out,
                                           const std::vector<std::vector<Arc>>& in,
                                           std::size_t& count) {
  const std::size_t n = out.size();
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{s, 0}};
    seen[s] = 1;
    while (!stack.empty()) {
      auto& [u, next] = stack.back();
      if (next < out[u].size()) {
        const std::size_t v = out[u][next++].head;
        if (!seen[v]) {
          seen[v] = 1;
          stack.emplace_back(v, 0);
        }
      } else {
        order.push_back(u);
        stack.pop_back();
      }
    }
  }
  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> comp(n, kNone);
  count = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[*it] != kNone) continue;
    std::vector<std::size_t> stack{*it};
    comp[*it] = count;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (const Arc& a : in[u]) {
        if (comp[a.head] == kNone) {
          comp[a.head] = count;
          stack.push_back(a.head);
        }
      }
    }
    ++count;
  }
  return comp;
}

using QueueItem = std::pair<double, std::size_t>;
using MinQueue = std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>>;

}  // namespace

RoadNetwork RoadNetwork::build(std::vector<Node> nodes, std::vector<Edge> edges) {
  if (nodes.size() < 2) throw ParseError("<network>", 0, "at least 2 nodes required");
  if (edges.empty()) throw ParseError("<network>", 0, "at least 1 edge required");

  std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
  RoadNetwork net;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!net.index_.emplace(nodes[i].id, i).second) {
      throw ParseError("<network>", 0, "duplicate node id " + std::to_string(nodes[i].id));
    }
  }
  net.nodes_ = std::move(nodes);
  net.out_.resize(net.nodes_.size());
  net.in_.resize(net.nodes_.size());

  for (const Edge& e : edges) {
    auto from = net.index_.find(e.from);
    auto to = net.index_.find(e.to);
    if (from == net.index_.end() || to == net.index_.end()) {
      throw UnknownNode(from == net.index_.end() ? e.from : e.to);
    }
    if (!(e.length_m > 0.0) || !std::isfinite(e.length_m)) {
      throw ParseError("<network>", 0, "edge " + std::to_string(e.id) + " has non-positive length");
    }
    net.out_[from->second].push_back({to->second, e.length_m, e.id});
    net.in_[to->second].push_back({from->second, e.length_m, e.id});
    if (e.bidirectional) {
      net.out_[to->second].push_back({from->second, e.length_m, e.id});
      net.in_[from->second].push_back({to->second, e.length_m, e.id});
    }
  }
  auto by_head = [](const Arc& a, const Arc& b) {
    return a.head != b.head ? a.head < b.head
                            : (a.length_m != b.length_m ? a.length_m < b.length_m : a.edge_id < b.edge_id);
  };
  for (auto& arcs : net.out_) std::sort(arcs.begin(), arcs.end(), by_head);
  for (auto& arcs : net.in_) std::sort(arcs.begin(), arcs.end(), by_head);
  net.edges_ = std::move(edges);

  std::size_t count = 0;
  const auto comp = strong_components(net.out_, net.in_, count);
  if (count > 1) {
    std::vector<std::size_t> size(count, 0);
    for (auto c : comp) ++size[c];
    // Main component: the largest; ties go to the one holding the smallest id.
    std::size_t main = comp[0];
    for (std::size_t i = 0; i < comp.size(); ++i) {
      if (size[comp[i]] > size[main]) main = comp[i];
    }
    for (std::size_t i = 0; i < comp.size(); ++i) {
      if (comp[i] != main) throw DisconnectedGraph(net.nodes_[i].id);
    }
  }
  return net;
}

std::size_t RoadNetwork::index_of(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw UnknownNode(id);
  return it->second;
}

std::optional<Arc> RoadNetwork::arc_between(std::size_t from, std::size_t to) const {
  const auto& arcs = out_[from];
  auto it = std::lower_bound(arcs.begin(), arcs.end(), to,
                             [](const Arc& a, std::size_t head) { return a.head < head; });
  if (it == arcs.end() || it->head != to) return std::nullopt;
  return *it;
}

RoadNetwork parse_network(std::istream& in, const std::string& source) {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = detail::strip_comment(raw);
    if (line.empty()) continue;
    const auto fields = detail::split_csv(line);
    try {
      if (fields[0] == "N") {
        if (fields.size() != 4) throw ParseError(source, line_no, "node record needs 4 fields");
        nodes.push_back({detail::to_int(fields[1]), detail::to_double(fields[2]),
                         detail::to_double(fields[3])});
      } else if (fields[0] == "E") {
        if (fields.size() != 6) throw ParseError(source, line_no, "edge record needs 6 fields");
        const auto bidir = detail::to_int(fields[5]);
        if (bidir != 0 && bidir != 1) throw ParseError(source, line_no, "bidirectional flag must be 0 or 1");
        Edge e{detail::to_int(fields[1]), detail::to_int(fields[2]), detail::to_int(fields[3]),
               detail::to_double(fields[4]), bidir == 1};
        if (!(e.length_m > 0.0)) throw ParseError(source, line_no, "edge length must be positive");
        edges.push_back(e);
      } else {
        throw ParseError(source, line_no, "unknown record type '" + fields[0] + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  try {
    return RoadNetwork::build(std::move(nodes), std::move(edges));
  } catch (const UnknownNode& e) {
    throw ParseError(source, line_no, std::string("edge endpoint: ") + e.what());
  }
}

RoadNetwork load_network(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError(file.string(), 0, "cannot open file");
  return parse_network(in, file.string());
}

std::vector<double> distances_to(const RoadNetwork& net, std::size_t target) {
  return distances_to_nearest(net, {target});
}

std::vector<double> distances_to_nearest(const RoadNetwork& net, const std::vector<std::size_t>& targets) {
  std::vector<double> dist(net.node_count(), kInf);
  MinQueue queue;
  for (auto target : targets) {
    dist[target] = 0.0;
    queue.emplace(0.0, target);
  }
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    for (const Arc& a : net.in_arcs(u)) {
      const double nd = a.length_m + d;
      if (nd < dist[a.head]) {
        dist[a.head] = nd;
        queue.emplace(nd, a.head);
      }
    }
  }
  return dist;
}

Path walk_shortest_path(const RoadNetwork& net, std::size_t from, std::size_t to,
                        const std::vector<double>& dist_to_target) {
  Path path;
  path.node_sequence.push_back(net.node_at(from).id);
  std::size_t u = from;
  while (u != to) {
    // Arcs are sorted by head index == node id order, so the first arc on a
    // shortest path is the lexicographically smallest continuation.
    const Arc* next = nullptr;
    for (const Arc& a : net.out_arcs(u)) {
      if (same_length(a.length_m + dist_to_target[a.head], dist_to_target[u])) {
        next = &a;
        break;
      }
    }
    if (next == nullptr) throw Error("routing invariant violated: no shortest-path continuation");
    path.legs_m.push_back(next->length_m);
    path.total_length_m += next->length_m;
    path.node_sequence.push_back(net.node_at(next->head).id);
    u = next->head;
  }
  if (path.node_sequence.size() == 1) path.node_sequence.clear();
  return path;
}

Path shortest_path(const RoadNetwork& net, NodeId from, NodeId to) {
  const auto s = net.index_of(from);
  const auto t = net.index_of(to);
  if (s == t) return {};
  return walk_shortest_path(net, s, t, distances_to(net, t));
}

double network_distance(const RoadNetwork& net, NodeId from, NodeId to) {
  const auto s = net.index_of(from);
  const auto t = net.index_of(to);
  if (s == t) return 0.0;
  std::vector<double> dist(net.node_count(), kInf);
  MinQueue queue;
  dist[s] = 0.0;
  queue.emplace(0.0, s);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (u == t) return d;
    if (d > dist[u]) continue;
    for (const Arc& a : net.out_arcs(u)) {
      const double nd = d + a.length_m;
      if (nd < dist[a.head]) {
        dist[a.head] = nd;
        queue.emplace(nd, a.head);
      }
    }
  }
  throw Error("routing invariant violated: target unreachable");
}

double euclidean_distance(const RoadNetwork& net, NodeId a, NodeId b) {
  const auto& na = net.node(a);
  const auto& nb = net.node(b);
  return std::hypot(na.x_m - nb.x_m, na.y_m - nb.y_m);
}

Router::Router(std::shared_ptr<const RoadNetwork> net, std::size_t max_cached_trees)
    : net_(std::move(net)), max_cached_(max_cached_trees) {}

const std::vector<double>& Router::to(NodeId target) {
  const auto t = net_->index_of(target);
  auto it = trees_.find(t);
  if (it != trees_.end()) return it->second;
  if (trees_.size() >= max_cached_) trees_.clear();
  return trees_.emplace(t, distances_to(*net_, t)).first->second;
}

double Router::distance(NodeId from, NodeId to) {
  if (from == to) return 0.0;
  return this->to(to)[net_->index_of(from)];
}

Path Router::path(NodeId from, NodeId to) {
  if (from == to) return {};
  const auto& tree = this->to(to);
  return walk_shortest_path(*net_, net_->index_of(from), net_->index_of(to), tree);
}

}  // namespace fleetsim
