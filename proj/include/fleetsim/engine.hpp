#pragma once

#include <memory>
#include <unordered_map>
#include <vector>

#include "fleetsim/charging.hpp"
#include "fleetsim/demand.hpp"
#include "fleetsim/dispatch.hpp"
#include "fleetsim/fleet.hpp"
#include "fleetsim/metrics.hpp"
#include "fleetsim/network.hpp"
#include "fleetsim/random.hpp"
#include "fleetsim/scenario.hpp"

namespace fleetsim {

/// One simulation instance. Each call to tick() runs the fixed phase order:
///   0. release orders whose placement time has been reached
///   1. advance vehicles, handle pickup and delivery arrivals
///   2. finish charges, free slots, admit queues, then station arrivals
///   3. night-charging sweep (NC, SD)
///   4. low-battery sweep and station routing
///   5. drop stale orders (Live), then FIFO dispatch
///   6. state-count sample
/// The first tick runs at t = 0 and moves nobody; tick k runs at k * tick_s.
class Engine {
 public:
  Engine(ScenarioConfig config, const ScenarioInputs& inputs);

  void tick();
  /// Batch: every order released and delivered.
  bool finished() const;
  /// Appends end-of-run odometer records so the trace alone carries all km.
  void finalize();

  double clock_s() const { return clock_; }
  std::int64_t tick_index() const { return tick_index_; }
  const ScenarioConfig& config() const { return config_; }
  const RoadNetwork& network() const { return *net_; }
  const EventTrace& trace() const { return trace_; }
  const std::vector<Vehicle>& vehicles() const { return vehicles_; }
  const std::vector<Station>& stations() const { return stations_; }
  const std::vector<Order>& orders() const { return orders_; }
  /// Indices into orders() of currently Waiting orders, FIFO order.
  const std::vector<std::size_t>& waiting() const { return waiting_; }
  /// Phase-6 samples, one per tick (Batch only).
  const std::vector<StateCounts>& samples() const { return samples_; }
  StateCounts state_counts() const;

  // Live-session controls. Call between ticks; they take effect from the
  // next tick on.
  void set_fleet_target(std::size_t n);
  std::size_t fleet_target() const { return fleet_target_; }
  /// Replaces the vehicle spec for every vehicle; batteries keep their fraction.
  void set_spec(const VehicleSpec& spec);
  void set_charging(const ChargingStrategy& strategy, const DispatchPolicy& policy);
  void set_scenario_label(ScenarioKind kind) { config_.scenario = kind; }
  void record_control(const std::string& payload);

 private:
  Vehicle& vehicle(VehicleId id);
  Station& station(StationId id);
  Order& order(OrderId id);

  void transition(Vehicle& v, VehicleState to);
  void record_vehicle(const Vehicle& v, std::int8_t from, std::int8_t to, double leg_km);
  void transition(Order& o, OrderState to);
  void record(const TraceRecord& r);

  void release_orders();
  std::vector<VehicleEvent> advance_all();
  void handle_trip_arrival(Vehicle& v);
  void phase_stations(const std::vector<VehicleEvent>& events);
  void phase_night();
  void phase_low_battery();
  void enter_station(Vehicle& v);
  void reap_retired();
  void drop_stale_orders();
  void phase_dispatch();
  void assign(Vehicle& v, Order& o);

  void add_vehicle();
  void remove_vehicle(std::size_t index);

  ScenarioConfig config_;
  std::shared_ptr<const RoadNetwork> net_;
  Router router_;
  std::unique_ptr<Dispatcher> dispatcher_;
  std::vector<Station> stations_;
  std::vector<Vehicle> vehicles_;
  std::vector<Order> orders_;
  std::vector<Order> day_template_;
  std::unordered_map<OrderId, std::size_t> order_index_;
  OrderId live_id_stride_ = 0;
  std::int64_t replayed_days_ = 0;

  std::size_t next_release_ = 0;
  std::vector<std::size_t> waiting_;
  std::size_t delivered_ = 0;

  Rng spawn_rng_;
  VehicleId next_vehicle_id_ = 0;
  std::size_t fleet_target_ = 0;

  std::int64_t tick_index_ = 0;
  double clock_ = 0.0;
  double last_activity_s_ = 0.0;
  EventTrace trace_;
  std::vector<StateCounts> samples_;
};

struct RunResult {
  MetricsReport report;
  EventTrace trace;
  std::vector<StateCounts> engine_samples;
};

/// Batch run to completion. Throws Stalled when no progress is possible.
RunResult run(const ScenarioConfig& config, const ScenarioInputs& inputs);
RunResult run(const ScenarioConfig& config);

}  // namespace fleetsim
