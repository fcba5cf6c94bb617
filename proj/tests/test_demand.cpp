#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <boost/math/distributions/chi_squared.hpp>
#include <sstream>

#include "fleetsim/demand.hpp"
#include "fleetsim/errors.hpp"
#include "support.hpp"

using namespace fleetsim;
using namespace fleetsim::testing;

namespace {

std::vector<Order> ingest(const std::string& text, const RoadNetwork& net) {
  std::istringstream in(text);
  return ingest_orders(in, net);
}

DemandProfile two_node_profile(std::vector<double> bins, std::size_t total) {
  DemandProfile p;
  p.bin_width_s = 450;
  p.bin_weights = std::move(bins);
  p.total_orders = total;
  p.spatial_weights = {{1, 1.0, 0.0}, {2, 0.0, 1.0}};
  return p;
}

}  // namespace

TEST(Ingest, SingleRow) {
  const auto net = line_graph(3, 100);
  const auto orders = ingest("order_id,placed_at_s,restaurant_node,destination_node\n7,0,1,2\n", net);
  ASSERT_EQ(orders.size(), 1u);
  EXPECT_EQ(orders[0].state, OrderState::Waiting);
  EXPECT_EQ(orders[0].restaurant_node, 1);
  EXPECT_EQ(orders[0].destination_node, 2);
}

TEST(Ingest, RowErrorsCarryTheLine) {
  const auto net = line_graph(3, 100);
  try {
    ingest("order_id,placed_at_s,restaurant_node,destination_node\n1,0,1,2\n2,5,3,3\n", net);
    FAIL();
  } catch (const SameOriginDestination& e) {
    EXPECT_EQ(e.row(), 3u);
  }
  try {
    ingest("1,0,1,9\n", net);
    FAIL();
  } catch (const UnknownNode& e) {
    EXPECT_EQ(e.row(), 1u);
    EXPECT_EQ(e.node(), 9);
  }
  EXPECT_THROW(ingest("1,-1,1,2\n", net), NegativeTime);
  EXPECT_THROW(ingest("1,abc,1,2\n", net), ParseError);
}

TEST(Ingest, ShuffledFileComesOutSorted) {
  const auto net = line_graph(10, 100);
  Rng rng(3);
  std::ostringstream text;
  std::vector<double> times;
  for (int i = 0; i < 100; ++i) {
    const double t = static_cast<double>(rng.index(86400));
    times.push_back(t);
    const auto a = static_cast<int>(rng.index(10)) + 1;
    const int b = a % 10 + 1;
    text << i << ',' << t << ',' << a << ',' << b << '\n';
  }
  const auto orders = ingest(text.str(), net);
  std::vector<double> expected = times;
  std::sort(expected.begin(), expected.end());
  ASSERT_EQ(orders.size(), 100u);
  for (std::size_t i = 0; i < orders.size(); ++i) {
    EXPECT_EQ(orders[i].placed_at_s, expected[i]);
    // Ids follow file order, so they index the unsorted time column.
    EXPECT_EQ(times[static_cast<std::size_t>(orders[i].id)], orders[i].placed_at_s);
  }
}

TEST(Synthetic, PointMass) {
  DemandProfile p;
  p.bin_width_s = 450;
  p.bin_weights = {1.0};
  p.total_orders = 5;
  p.spatial_weights = {{4, 1.0, 0.0}, {9, 0.0, 1.0}};
  const auto orders = generate_synthetic(p, 1);
  ASSERT_EQ(orders.size(), 5u);
  for (const auto& o : orders) {
    EXPECT_EQ(o.restaurant_node, 4);
    EXPECT_EQ(o.destination_node, 9);
    EXPECT_GE(o.placed_at_s, 0.0);
    EXPECT_LT(o.placed_at_s, 450.0);
  }
}

TEST(Synthetic, BinomialShare) {
  const auto orders = generate_synthetic(two_node_profile({1.0, 3.0}, 40000), 11);
  ASSERT_EQ(orders.size(), 40000u);
  const auto second = std::count_if(orders.begin(), orders.end(), [](const Order& o) { return o.placed_at_s >= 450; });
  // sd of the share is sqrt(0.75 * 0.25 / 40000) = 0.22 pp, so 1 pp is over 4.6 sd.
  EXPECT_NEAR(static_cast<double>(second) / 40000.0, 0.75, 0.01);
}

TEST(Synthetic, ChiSquareAgainstBinWeights) {
  std::vector<double> w;
  for (int b = 0; b < 192; ++b) w.push_back(1.0 + (b % 17) + (b > 90 && b < 110 ? 20.0 : 0.0));
  const double total_w = std::accumulate(w.begin(), w.end(), 0.0);
  const boost::math::chi_squared dist(static_cast<double>(w.size() - 1));
  const double critical = boost::math::quantile(boost::math::complement(dist, 0.001));
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const std::size_t total = 20000;
    const auto orders = generate_synthetic(two_node_profile(w, total), seed);
    std::vector<double> counts(w.size(), 0.0);
    for (const auto& o : orders) counts[static_cast<std::size_t>(o.placed_at_s / 450.0)] += 1.0;
    double chi2 = 0.0;
    for (std::size_t b = 0; b < w.size(); ++b) {
      const double expected = total * w[b] / total_w;
      chi2 += (counts[b] - expected) * (counts[b] - expected) / expected;
    }
    EXPECT_LT(chi2, critical) << "seed " << seed;
  }
}

TEST(Synthetic, DeterministicAndValid) {
  const auto profile = load_profile(kDeskDir + "/profile.txt");
  const auto a = generate_synthetic(profile, 5);
  const auto b = generate_synthetic(profile, 5);
  EXPECT_EQ(a, b);
  std::ostringstream sa;
  std::ostringstream sb;
  write_orders_csv(sa, a);
  write_orders_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(a.size(), profile.total_orders);
  EXPECT_NE(a, generate_synthetic(profile, 6));
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NE(a[i].restaurant_node, a[i].destination_node);
    if (i) EXPECT_LE(a[i - 1].placed_at_s, a[i].placed_at_s);
  }
}

TEST(Synthetic, DegenerateProfiles) {
  EXPECT_THROW(generate_synthetic(two_node_profile({0.0, 0.0}, 10), 1), DegenerateProfile);
  auto p = two_node_profile({1.0}, 10);
  p.spatial_weights = {{1, 1.0, 1.0}};
  // Only one node can be drawn on both sides: rejection gives up.
  EXPECT_THROW(generate_synthetic(p, 1), DegenerateProfile);
  p.spatial_weights = {{1, 0.0, 1.0}, {2, 0.0, 1.0}};
  EXPECT_THROW(generate_synthetic(p, 1), DegenerateProfile);
}

TEST(Synthetic, ProfileFileRoundTrip) {
  std::istringstream in("# c\n450\ntotal_orders,3\n1\n2\n1,1,0\n2,0,1\n");
  const auto p = parse_profile(in);
  EXPECT_EQ(p.bin_width_s, 450);
  EXPECT_EQ(p.bin_weights, (std::vector<double>{1, 2}));
  EXPECT_EQ(p.total_orders, 3u);
  ASSERT_EQ(p.spatial_weights.size(), 2u);
  std::istringstream bad("450\n1,2\n");
  EXPECT_THROW(parse_profile(bad), ParseError);
  EXPECT_NO_THROW(check_profile_nodes(p, line_graph(3, 1)));
  auto q = p;
  q.spatial_weights.push_back({7, 1, 1});
  EXPECT_THROW(check_profile_nodes(q, line_graph(3, 1)), UnknownNode);
}
