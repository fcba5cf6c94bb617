#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "fleetsim/errors.hpp"
#include "fleetsim/network.hpp"
#include "support.hpp"

using namespace fleetsim;
using namespace fleetsim::testing;

TEST(Network, MinimalGraph) {
  const auto net = network_from("N,1,0,0\nN,2,1000,0\nE,1,1,2,1000,1\n");
  EXPECT_EQ(net.node_count(), 2u);
  ASSERT_EQ(net.edges().size(), 1u);
  EXPECT_DOUBLE_EQ(net.edges()[0].length_m, 1000.0);
  EXPECT_DOUBLE_EQ(network_distance(net, 2, 1), 1000.0);
}

TEST(Network, OrphanNodeIsRejected) {
  try {
    network_from("N,1,0,0\nN,2,10,0\nN,3,20,0\nE,1,1,2,10,1\n");
    FAIL() << "expected DisconnectedGraph";
  } catch (const DisconnectedGraph& e) {
    EXPECT_EQ(e.node(), 3);
  }
}

TEST(Network, OneWayDeadEndIsRejected) {
  EXPECT_THROW(network_from("N,1,0,0\nN,2,10,0\nN,3,20,0\nE,1,1,2,10,1\nE,2,2,3,10,0\n"), DisconnectedGraph);
}

TEST(Network, SquareGrid) {
  const auto net = network_from(
      "# square\n"
      "N,1,0,0\nN,2,500,0\nN,3,500,500\nN,4,0,500\n"
      "E,1,1,2,500,1\nE,2,2,3,500,1\nE,3,3,4,500,1\nE,4,4,1,500,1\n");
  const auto p = shortest_path(net, 1, 3);
  EXPECT_DOUBLE_EQ(p.total_length_m, 1000.0);
  // Two equal routes; the smaller sequence 1-2-3 wins over 1-4-3.
  EXPECT_EQ(p.node_sequence, (std::vector<NodeId>{1, 2, 3}));
}

TEST(Network, MalformedRecords) {
  EXPECT_THROW(network_from("N,1,0\n"), ParseError);
  EXPECT_THROW(network_from("N,1,0,0\nN,2,1,0\nE,1,1,2,-5,1\n"), ParseError);
  EXPECT_THROW(network_from("N,1,0,0\nN,2,1,0\nE,1,1,9,5,1\n"), ParseError);
  EXPECT_THROW(network_from("N,1,0,0\n"), ParseError);
  EXPECT_THROW(network_from("X,1,0,0\n"), ParseError);
}

TEST(Network, IdentityAndChain) {
  const auto net = line_graph(3, 1000.0);
  const auto self = shortest_path(net, 2, 2);
  EXPECT_TRUE(self.empty());
  EXPECT_EQ(self.total_length_m, 0.0);
  EXPECT_DOUBLE_EQ(shortest_path(net, 1, 3).total_length_m, 2000.0);
  EXPECT_THROW(shortest_path(net, 1, 42), UnknownNode);
  EXPECT_THROW(network_distance(net, 42, 1), UnknownNode);
}

TEST(Network, FloydWarshallOracleOnRandomGraphs) {
  Rng rng(2024);
  for (int g = 0; g < 50; ++g) {
    const int n = 2 + static_cast<int>(rng.index(19));
    const auto net = random_graph(rng, n);
    const auto oracle = floyd_warshall(net);
    for (std::size_t i = 0; i < net.node_count(); ++i) {
      for (std::size_t j = 0; j < net.node_count(); ++j) {
        const NodeId a = net.node_at(i).id;
        const NodeId b = net.node_at(j).id;
        ASSERT_EQ(shortest_path(net, a, b).total_length_m, oracle[i][j]) << "graph " << g << " " << a << "->" << b;
        ASSERT_EQ(network_distance(net, a, b), oracle[i][j]);
      }
    }
  }
}

TEST(Network, PathIsWalkableAndSumsItsLegs) {
  Rng rng(7);
  for (int g = 0; g < 20; ++g) {
    const auto net = random_graph(rng, 15);
    for (int q = 0; q < 30; ++q) {
      const NodeId a = net.node_at(rng.index(net.node_count())).id;
      const NodeId b = net.node_at(rng.index(net.node_count())).id;
      const auto p = shortest_path(net, a, b);
      if (a == b) continue;
      ASSERT_EQ(p.node_sequence.front(), a);
      ASSERT_EQ(p.node_sequence.back(), b);
      double sum = 0.0;
      for (std::size_t k = 0; k + 1 < p.node_sequence.size(); ++k) {
        const auto arc = net.arc_between(net.index_of(p.node_sequence[k]), net.index_of(p.node_sequence[k + 1]));
        ASSERT_TRUE(arc.has_value());
        ASSERT_EQ(arc->length_m, p.legs_m[k]);
        sum += p.legs_m[k];
      }
      EXPECT_EQ(sum, p.total_length_m);
    }
  }
}

TEST(Network, DistanceEqualsPathLengthOnDesk) {
  const auto net = load_network(kDeskDir + "/network.txt");
  Rng rng(99);
  for (int q = 0; q < 100; ++q) {
    const NodeId a = net.node_at(rng.index(net.node_count())).id;
    const NodeId b = net.node_at(rng.index(net.node_count())).id;
    const double d = network_distance(net, a, b);
    EXPECT_EQ(d, shortest_path(net, a, b).total_length_m);
    EXPECT_EQ(d, network_distance(net, b, a));
    EXPECT_GE(d + 1e-9, euclidean_distance(net, a, b));
    if (a != b) EXPECT_GT(d, 0.0);
  }
}

TEST(Network, LexicographicTieBreakOnGrid) {
  // 3x3 grid with unit blocks: every monotone staircase 1 -> 9 has length 4.
  std::string text;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) text += "N," + std::to_string(r * 3 + c + 1) + "," + std::to_string(c) + "," + std::to_string(r) + "\n";
  }
  int e = 1;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      const int id = r * 3 + c + 1;
      if (c < 2) text += "E," + std::to_string(e++) + "," + std::to_string(id) + "," + std::to_string(id + 1) + ",1,1\n";
      if (r < 2) text += "E," + std::to_string(e++) + "," + std::to_string(id) + "," + std::to_string(id + 3) + ",1,1\n";
    }
  }
  const auto net = network_from(text);
  EXPECT_EQ(shortest_path(net, 1, 9).node_sequence, (std::vector<NodeId>{1, 2, 3, 6, 9}));
  EXPECT_EQ(shortest_path(net, 9, 1).node_sequence, (std::vector<NodeId>{9, 6, 3, 2, 1}));
  Router router(std::make_shared<const RoadNetwork>(net));
  EXPECT_EQ(router.path(1, 9).node_sequence, shortest_path(net, 1, 9).node_sequence);
}

TEST(Network, RouterMatchesFreeFunctions) {
  Rng rng(5);
  auto net = std::make_shared<const RoadNetwork>(random_graph(rng, 18));
  Router router(net, 3);
  for (int q = 0; q < 200; ++q) {
    const NodeId a = net->node_at(rng.index(net->node_count())).id;
    const NodeId b = net->node_at(rng.index(net->node_count())).id;
    ASSERT_EQ(router.distance(a, b), network_distance(*net, a, b));
    ASSERT_EQ(router.path(a, b).node_sequence, shortest_path(*net, a, b).node_sequence);
  }
}

TEST(Network, NearestTargetField) {
  const auto net = line_graph(5, 100.0);
  const auto d = distances_to_nearest(net, {net.index_of(1), net.index_of(5)});
  EXPECT_EQ(d, (std::vector<double>{0, 100, 200, 100, 0}));
}
