#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fleetsim/network.hpp"

namespace fleetsim {

using OrderId = std::int64_t;

enum class OrderState { Waiting, Assigned, InTransit, Delivered, Dropped };

const char* to_string(OrderState s);

struct Order {
  OrderId id = 0;
  double placed_at_s = 0.0;
  NodeId restaurant_node = 0;
  NodeId destination_node = 0;
  OrderState state = OrderState::Waiting;
  std::optional<double> assigned_at_s;
  std::optional<double> picked_up_at_s;
  std::optional<double> delivered_at_s;

  bool operator==(const Order&) const = default;
};

struct SpatialWeight {
  NodeId node = 0;
  double restaurant_w = 0.0;
  double destination_w = 0.0;
};

/// Time-of-day intensity plus spatial origin/destination weights.
struct DemandProfile {
  double bin_width_s = 450.0;
  std::vector<double> bin_weights;
  std::size_t total_orders = 0;
  std::vector<SpatialWeight> spatial_weights;

  /// Throws DegenerateProfile.
  void validate() const;
};

/// Reads `order_id,placed_at_s,restaurant_node,destination_node` rows
/// (optional header). Ids are reassigned 0..n-1 in file order; the result is
/// stably sorted by placement time. Errors carry the 1-based file line.
std::vector<Order> ingest_orders(std::istream& in, const RoadNetwork& net);
std::vector<Order> ingest_orders(const std::filesystem::path& file, const RoadNetwork& net);

void write_orders_csv(std::ostream& out, const std::vector<Order>& orders);

/// Multinomial over normalized bins, uniform within a bin (whole seconds),
/// independent restaurant/destination draws with equal pairs rejected.
std::vector<Order> generate_synthetic(const DemandProfile& profile, std::uint64_t seed);

/// Profile file: first record is bin_width_s; single-value lines are bin
/// weights; `node,restaurant_w,dest_w` lines are spatial weights; an
/// optional `total_orders,<n>` line sets the order count.
DemandProfile parse_profile(std::istream& in, const std::string& source = "<profile>");
DemandProfile load_profile(const std::filesystem::path& file);

/// Checks that every referenced node exists. Throws UnknownNode.
void check_profile_nodes(const DemandProfile& profile, const RoadNetwork& net);

}  // namespace fleetsim
