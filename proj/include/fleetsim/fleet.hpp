#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fleetsim/demand.hpp"
#include "fleetsim/network.hpp"
#include "fleetsim/random.hpp"

namespace fleetsim {

using VehicleId = std::int64_t;
using StationId = std::int64_t;

enum class VehicleClass { ICECar, BEVCar, SLAV };
enum class ChargeKind { Plug, Swap };
enum class VehicleState { Idle, ToPickup, ToDelivery, ToCharge, Charging };

inline constexpr std::size_t kVehicleStateCount = 5;

const char* to_string(VehicleClass c);
const char* to_string(ChargeKind k);
const char* to_string(VehicleState s);

/// Only the edges of the vehicle state machine are allowed:
/// Idle->ToPickup, Idle->ToCharge, ToPickup->ToDelivery, ToDelivery->Idle,
/// ToDelivery->ToCharge, ToCharge->Charging, Charging->Idle.
bool transition_allowed(VehicleState from, VehicleState to);

/// Scenario-level vehicle parameters. Battery is tracked as km of range.
struct VehicleSpec {
  VehicleClass vehicle_class = VehicleClass::SLAV;
  double speed_kmh = 11.0;
  double range_km = 35.0;
  double min_level_frac = 0.25;
  double full_recharge_s = 16200.0;
  double swap_s = 111.0;
  ChargeKind charge_kind = ChargeKind::Plug;

  double min_level_km() const { return min_level_frac * range_km; }
  /// Throws InvalidConfig.
  void validate() const;

  static VehicleSpec ice_car();
  static VehicleSpec bev_car();
  static VehicleSpec slav(double range_km = 35.0, double speed_kmh = 11.0,
                          ChargeKind kind = ChargeKind::Plug);
};

struct Vehicle {
  VehicleId id = 0;
  /// Start node of the current path, set to the path end on arrival. While
  /// moving, the vehicle is `progress_m` along `path`.
  NodeId node = 0;
  Path path;
  double progress_m = 0.0;

  double battery_km = 0.0;
  VehicleState state = VehicleState::Idle;
  std::optional<OrderId> assigned_order;
  std::optional<double> charge_finish_at_s;
  std::optional<StationId> station;
  bool queued = false;
  bool retiring = false;
  std::optional<std::int64_t> night_charged_day;

  double km_pickup = 0.0;
  double km_delivery = 0.0;
  double km_recharge = 0.0;
  /// Distance driven since the last state change.
  double leg_km = 0.0;
  std::int64_t trips_completed = 0;
  std::int64_t charges_completed = 0;

  bool moving() const { return state == VehicleState::ToPickup || state == VehicleState::ToDelivery ||
                               (state == VehicleState::ToCharge && !queued); }
  bool at_path_end() const;
  double total_km() const { return km_pickup + km_delivery + km_recharge; }
};

enum class VehicleEventKind { Arrived, ChargeComplete };

struct VehicleEvent {
  VehicleEventKind kind = VehicleEventKind::Arrived;
  VehicleId vehicle = 0;
  /// Arrived: the moment the path end was reached, within the step.
  double at_s = 0.0;

  bool operator==(const VehicleEvent&) const = default;
};

/// Vehicles at uniformly random nodes with battery uniform in
/// [min_level_frac * range, range], all Idle. Ids are 0..n-1.
std::vector<Vehicle> init_fleet(std::size_t n, const VehicleSpec& spec, const RoadNetwork& net,
                                std::uint64_t seed);

/// Draws one vehicle the way init_fleet does, from an existing generator.
Vehicle spawn_vehicle(VehicleId id, const VehicleSpec& spec, const RoadNetwork& net, Rng& rng);

/// Moves a vehicle for dt_s. A moving vehicle covers speed*dt along its
/// path, clamped at the end (Arrived). A Charging vehicle emits
/// ChargeComplete once now_s reaches its finish time. Throws BatteryUnderflow.
std::vector<VehicleEvent> advance(Vehicle& vehicle, double dt_s, const VehicleSpec& spec, double now_s);

/// Strictly below the threshold.
bool needs_charge(const Vehicle& vehicle, const VehicleSpec& spec);

/// Puts a ToCharge vehicle standing on `station_node` into Charging.
/// Plug: linear partial recharge; Swap: fixed duration. Throws NotAtStation.
void start_charge(Vehicle& vehicle, const VehicleSpec& spec, ChargeKind station_kind,
                  NodeId station_node, double now_s);

/// Charging -> Idle with a full battery.
void finish_charge(Vehicle& vehicle, const VehicleSpec& spec);

/// Planar position, interpolated along the current hop when moving.
std::pair<double, double> position_xy(const Vehicle& vehicle, const RoadNetwork& net);

/// Sets a new route and resets progress.
void set_route(Vehicle& vehicle, Path path);

}  // namespace fleetsim
