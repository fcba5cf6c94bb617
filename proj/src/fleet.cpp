#include "fleetsim/fleet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fleetsim/errors.hpp"

namespace fleetsim {

namespace {

// Arrival tolerance absorbs accumulated rounding of per-tick steps.
constexpr double kArrivalEpsM = 1e-6;
constexpr double kBatteryEpsKm = 1e-9;

}  // namespace

const char* to_string(VehicleClass c) {
  switch (c) {
    case VehicleClass::ICECar: return "ICECar";
    case VehicleClass::BEVCar: return "BEVCar";
    case VehicleClass::SLAV: return "SLAV";
  }
  return "?";
}

const char* to_string(ChargeKind k) { return k == ChargeKind::Plug ? "Plug" : "Swap"; }

const char* to_string(VehicleState s) {
  switch (s) {
    case VehicleState::Idle: return "Idle";
    case VehicleState::ToPickup: return "ToPickup";
    case VehicleState::ToDelivery: return "ToDelivery";
    case VehicleState::ToCharge: return "ToCharge";
    case VehicleState::Charging: return "Charging";
  }
  return "?";
}

bool transition_allowed(VehicleState from, VehicleState to) {
  using S = VehicleState;
  switch (from) {
    case S::Idle: return to == S::ToPickup || to == S::ToCharge;
    case S::ToPickup: return to == S::ToDelivery;
    case S::ToDelivery: return to == S::Idle || to == S::ToCharge;
    case S::ToCharge: return to == S::Charging;
    case S::Charging: return to == S::Idle;
  }
  return false;
}

void VehicleSpec::validate() const {
  if (!(speed_kmh > 0.0)) throw InvalidConfig("speed_kmh must be positive");
  if (!(range_km > 0.0)) throw InvalidConfig("range_km must be positive");
  if (!(min_level_frac > 0.0 && min_level_frac < 1.0)) {
    throw InvalidConfig("min_level_frac must lie in (0, 1)");
  }
  if (full_recharge_s < 0.0 || swap_s < 0.0) throw InvalidConfig("charge durations must be >= 0");
}

VehicleSpec VehicleSpec::ice_car() {
  // Refuelling is modelled as a 3-minute plug charge.
  return {VehicleClass::ICECar, 30.0, 500.0, 0.15, 180.0, 111.0, ChargeKind::Plug};
}

VehicleSpec VehicleSpec::bev_car() {
  return {VehicleClass::BEVCar, 30.0, 342.0, 0.15, 1800.0, 111.0, ChargeKind::Plug};
}

VehicleSpec VehicleSpec::slav(double range_km, double speed_kmh, ChargeKind kind) {
  return {VehicleClass::SLAV, speed_kmh, range_km, 0.25, 16200.0, 111.0, kind};
}

bool Vehicle::at_path_end() const {
  return path.empty() || progress_m >= path.total_length_m - kArrivalEpsM;
}

Vehicle spawn_vehicle(VehicleId id, const VehicleSpec& spec, const RoadNetwork& net, Rng& rng) {
  Vehicle v;
  v.id = id;
  v.node = net.node_at(rng.index(net.node_count())).id;
  v.battery_km = rng.uniform(spec.min_level_km(), spec.range_km);
  return v;
}

std::vector<Vehicle> init_fleet(std::size_t n, const VehicleSpec& spec, const RoadNetwork& net,
                                std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  std::vector<Vehicle> fleet;
  fleet.reserve(n);
  for (std::size_t i = 0; i < n; ++i) fleet.push_back(spawn_vehicle(static_cast<VehicleId>(i), spec, net, rng));
  return fleet;
}

std::vector<VehicleEvent> advance(Vehicle& v, double dt_s, const VehicleSpec& spec, double now_s) {
  std::vector<VehicleEvent> events;
  if (v.state == VehicleState::Charging) {
    if (v.charge_finish_at_s && now_s >= *v.charge_finish_at_s) {
      events.push_back({VehicleEventKind::ChargeComplete, v.id, now_s});
    }
    return events;
  }
  if (!v.moving()) return events;

  const double remaining = std::max(0.0, v.path.total_length_m - v.progress_m);
  const double step = spec.speed_kmh * dt_s / 3.6;
  const bool arrives = step >= remaining - kArrivalEpsM;
  const double moved_m = arrives ? remaining : step;
  const double moved_km = moved_m / 1000.0;

  if (v.battery_km - moved_km < -kBatteryEpsKm) {
    throw BatteryUnderflow("vehicle " + std::to_string(v.id) + " ran out of battery");
  }
  v.battery_km = std::max(0.0, v.battery_km - moved_km);
  v.leg_km += moved_km;
  switch (v.state) {
    case VehicleState::ToPickup: v.km_pickup += moved_km; break;
    case VehicleState::ToDelivery: v.km_delivery += moved_km; break;
    default: v.km_recharge += moved_km; break;
  }

  if (arrives) {
    v.progress_m = v.path.total_length_m;
    if (!v.path.empty()) v.node = v.path.node_sequence.back();
    const double used_s = step > 0.0 ? dt_s * moved_m / step : 0.0;
    events.push_back({VehicleEventKind::Arrived, v.id, now_s - dt_s + std::min(used_s, dt_s)});
  } else {
    v.progress_m += moved_m;
  }
  return events;
}

bool needs_charge(const Vehicle& v, const VehicleSpec& spec) {
  return v.battery_km < spec.min_level_frac * spec.range_km;
}

void start_charge(Vehicle& v, const VehicleSpec& spec, ChargeKind station_kind, NodeId station_node,
                  double now_s) {
  if (v.state != VehicleState::ToCharge || v.node != station_node || !v.at_path_end()) {
    throw NotAtStation("vehicle " + std::to_string(v.id) + " is not waiting at the station");
  }
  const double duration =
      station_kind == ChargeKind::Swap
          ? spec.swap_s
          : spec.full_recharge_s * (1.0 - std::clamp(v.battery_km / spec.range_km, 0.0, 1.0));
  v.state = VehicleState::Charging;
  v.queued = false;
  v.charge_finish_at_s = now_s + duration;
}

void finish_charge(Vehicle& v, const VehicleSpec& spec) {
  v.battery_km = spec.range_km;
  v.state = VehicleState::Idle;
  v.charge_finish_at_s.reset();
  v.station.reset();
  ++v.charges_completed;
}

std::pair<double, double> position_xy(const Vehicle& v, const RoadNetwork& net) {
  if (!v.moving() || v.path.empty()) {
    const auto& n = net.node(v.node);
    return {n.x_m, n.y_m};
  }
  double left = v.progress_m;
  for (std::size_t i = 0; i < v.path.legs_m.size(); ++i) {
    const double leg = v.path.legs_m[i];
    if (left <= leg || i + 1 == v.path.legs_m.size()) {
      const auto& a = net.node(v.path.node_sequence[i]);
      const auto& b = net.node(v.path.node_sequence[i + 1]);
      const double f = std::clamp(left / leg, 0.0, 1.0);
      return {a.x_m + f * (b.x_m - a.x_m), a.y_m + f * (b.y_m - a.y_m)};
    }
    left -= leg;
  }
  const auto& n = net.node(v.node);
  return {n.x_m, n.y_m};
}

void set_route(Vehicle& v, Path path) {
  v.path = std::move(path);
  v.progress_m = 0.0;
}

}  // namespace fleetsim
