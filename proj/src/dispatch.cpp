#include "fleetsim/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fleetsim/errors.hpp"

namespace fleetsim {

namespace {

std::shared_ptr<const RoadNetwork> borrow(const RoadNetwork& net) {
  return std::shared_ptr<const RoadNetwork>(std::shared_ptr<const RoadNetwork>{}, &net);
}

std::vector<const Vehicle*> pointers(const std::vector<Vehicle>& vehicles) {
  std::vector<const Vehicle*> out;
  out.reserve(vehicles.size());
  for (const auto& v : vehicles) out.push_back(&v);
  return out;
}

}  // namespace

void DispatchPolicy::validate() const {
  if (candidate_count < 1) throw InvalidConfig("candidate_count must be >= 1");
  if (!(battery_exponent > 0.0)) throw InvalidConfig("battery_exponent must be positive");
}

Dispatcher::Dispatcher(Router& router, const std::vector<Station>& stations) : router_(router) {
  if (stations.empty()) throw NoStations();
  std::vector<std::size_t> targets;
  for (const auto& s : stations) targets.push_back(router.network().index_of(s.node));
  station_field_ = distances_to_nearest(router.network(), targets);
}

double Dispatcher::distance_to_station_m(NodeId node) const {
  return station_field_[router_.network().index_of(node)];
}

bool Dispatcher::feasible(const Vehicle& vehicle, const Order& order) {
  const double to_restaurant = router_.distance(vehicle.node, order.restaurant_node);
  const double trip = router_.distance(order.restaurant_node, order.destination_node);
  return fleetsim::feasible(vehicle.battery_km, to_restaurant, trip, distance_to_station_m(order.destination_node));
}

std::vector<Dispatcher::Candidate> Dispatcher::eligible(const Order& order,
                                                        const std::vector<const Vehicle*>& candidates) {
  std::vector<Candidate> out;
  const auto& net = router_.network();
  const double trip = router_.distance(order.restaurant_node, order.destination_node);
  const double reserve = distance_to_station_m(order.destination_node);
  // Copy out before any further router query can evict the tree.
  const auto& tree = router_.to(order.restaurant_node);
  for (const Vehicle* v : candidates) {
    if (v->state != VehicleState::Idle || v->retiring) continue;
    const double d = tree[net.index_of(v->node)];
    if (fleetsim::feasible(v->battery_km, d, trip, reserve)) out.push_back({d, v});
  }
  return out;
}

std::optional<VehicleId> Dispatcher::assign_nearest(const Order& order,
                                                    const std::vector<const Vehicle*>& candidates) {
  const auto pool = eligible(order, candidates);
  const Candidate* best = nullptr;
  for (const auto& c : pool) {
    if (best == nullptr || c.distance_m < best->distance_m ||
        (c.distance_m == best->distance_m && c.vehicle->id < best->vehicle->id)) {
      best = &c;
    }
  }
  if (best == nullptr) return std::nullopt;
  return best->vehicle->id;
}

std::optional<VehicleId> Dispatcher::assign_strategic(const Order& order,
                                                      const std::vector<const Vehicle*>& candidates,
                                                      const VehicleSpec& spec, const DispatchPolicy& policy) {
  auto pool = eligible(order, candidates);
  if (pool.empty()) return std::nullopt;
  const auto by_distance = [](const Candidate& a, const Candidate& b) {
    return a.distance_m != b.distance_m ? a.distance_m < b.distance_m : a.vehicle->id < b.vehicle->id;
  };
  const std::size_t k = std::min(policy.candidate_count, pool.size());
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k), pool.end(), by_distance);

  const Candidate* best = nullptr;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    const auto& c = pool[i];
    const double frac = c.vehicle->battery_km / spec.range_km;
    double score = std::numeric_limits<double>::infinity();
    if (c.distance_m == 0.0) {
      score = 0.0;
    } else if (frac > 0.0) {
      score = c.distance_m / std::pow(frac, policy.battery_exponent);
    }
    if (best == nullptr || score < best_score || (score == best_score && c.vehicle->id < best->vehicle->id)) {
      best = &c;
      best_score = score;
    }
  }
  return best->vehicle->id;
}

std::optional<VehicleId> Dispatcher::assign(const Order& order, const std::vector<const Vehicle*>& candidates,
                                            const VehicleSpec& spec, const DispatchPolicy& policy) {
  if (policy.kind == DispatchPolicy::Kind::Strategic) return assign_strategic(order, candidates, spec, policy);
  return assign_nearest(order, candidates);
}

bool feasible(const Vehicle& vehicle, const Order& order, const RoadNetwork& net,
              const std::vector<Station>& stations) {
  Router router(borrow(net));
  Dispatcher d(router, stations);
  return d.feasible(vehicle, order);
}

std::optional<VehicleId> assign_nearest(const Order& order, const std::vector<Vehicle>& vehicles,
                                        const RoadNetwork& net, const std::vector<Station>& stations) {
  Router router(borrow(net));
  Dispatcher d(router, stations);
  return d.assign_nearest(order, pointers(vehicles));
}

std::optional<VehicleId> assign_strategic(const Order& order, const std::vector<Vehicle>& vehicles,
                                          const RoadNetwork& net, const VehicleSpec& spec,
                                          const std::vector<Station>& stations, const DispatchPolicy& policy) {
  Router router(borrow(net));
  Dispatcher d(router, stations);
  return d.assign_strategic(order, pointers(vehicles), spec, policy);
}

}  // namespace fleetsim
