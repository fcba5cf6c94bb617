#pragma once

#include <optional>
#include <vector>

#include "fleetsim/charging.hpp"
#include "fleetsim/demand.hpp"
#include "fleetsim/fleet.hpp"
#include "fleetsim/network.hpp"

namespace fleetsim {

struct DispatchPolicy {
  enum class Kind { Nearest, Strategic };
  Kind kind = Kind::Nearest;
  /// Strategic only: how many nearest candidates are scored.
  std::size_t candidate_count = 5;
  /// Strategic only: score = distance_m / (battery fraction)^battery_exponent.
  double battery_exponent = 1.0;

  /// Throws InvalidConfig.
  void validate() const;
};

/// A vehicle can take an order when, after driving to the restaurant and on
/// to the destination, it still has enough range to reach the nearest station.
inline bool feasible(double battery_km, double to_restaurant_m, double restaurant_to_destination_m,
                     double destination_to_station_m) {
  return battery_km - (to_restaurant_m + restaurant_to_destination_m) / 1000.0 >=
         destination_to_station_m / 1000.0;
}

/// Stateful helper bound to one network and station set: caches the
/// nearest-station distance field and reuses the router's trees.
class Dispatcher {
 public:
  Dispatcher(Router& router, const std::vector<Station>& stations);

  double distance_to_station_m(NodeId node) const;

  bool feasible(const Vehicle& vehicle, const Order& order);

  /// Among Idle, feasible candidates: minimum network distance to the
  /// restaurant, ties by smallest vehicle id.
  std::optional<VehicleId> assign_nearest(const Order& order, const std::vector<const Vehicle*>& candidates);

  /// The k nearest Idle, feasible candidates, then argmin of
  /// distance / (battery/range)^alpha, ties by smallest vehicle id.
  std::optional<VehicleId> assign_strategic(const Order& order, const std::vector<const Vehicle*>& candidates,
                                            const VehicleSpec& spec, const DispatchPolicy& policy);

  std::optional<VehicleId> assign(const Order& order, const std::vector<const Vehicle*>& candidates,
                                  const VehicleSpec& spec, const DispatchPolicy& policy);

 private:
  struct Candidate {
    double distance_m;
    const Vehicle* vehicle;
  };
  std::vector<Candidate> eligible(const Order& order, const std::vector<const Vehicle*>& candidates);

  Router& router_;
  std::vector<double> station_field_;
};

// Convenience entry points over a plain vehicle list.
bool feasible(const Vehicle& vehicle, const Order& order, const RoadNetwork& net,
              const std::vector<Station>& stations);
std::optional<VehicleId> assign_nearest(const Order& order, const std::vector<Vehicle>& vehicles,
                                        const RoadNetwork& net, const std::vector<Station>& stations);
std::optional<VehicleId> assign_strategic(const Order& order, const std::vector<Vehicle>& vehicles,
                                          const RoadNetwork& net, const VehicleSpec& spec,
                                          const std::vector<Station>& stations, const DispatchPolicy& policy);

}  // namespace fleetsim
