#include "fleetsim/engine.hpp"

#include <algorithm>
#include <exception>
#include <thread>

#include "fleetsim/errors.hpp"

namespace fleetsim {

namespace {

constexpr std::uint64_t kSpawnStream = 0x9e3779b97f4a7c15ULL;

std::int8_t code(VehicleState s) { return static_cast<std::int8_t>(s); }
std::int8_t code(OrderState s) { return static_cast<std::int8_t>(s); }

bool event_order(const VehicleEvent& a, const VehicleEvent& b) {
  return a.kind != b.kind ? a.kind < b.kind : a.vehicle < b.vehicle;
}

}  // namespace

Engine::Engine(ScenarioConfig config, const ScenarioInputs& inputs)
    : config_(std::move(config)),
      net_(inputs.network),
      router_(inputs.network),
      stations_(inputs.stations),
      orders_(inputs.orders),
      spawn_rng_(config_.seed ^ kSpawnStream) {
  config_.validate();
  if (!net_) throw InvalidConfig("no network loaded");
  dispatcher_ = std::make_unique<Dispatcher>(router_, stations_);
  trace_.tick_s = config_.tick_s;
  // Station hardware follows the scenario.
  for (auto& s : stations_) s.kind = config_.strategy.station_kind();

  std::stable_sort(orders_.begin(), orders_.end(), [](const Order& a, const Order& b) {
    return a.placed_at_s != b.placed_at_s ? a.placed_at_s < b.placed_at_s : a.id < b.id;
  });
  for (std::size_t i = 0; i < orders_.size(); ++i) {
    orders_[i].state = OrderState::Waiting;
    orders_[i].assigned_at_s.reset();
    orders_[i].picked_up_at_s.reset();
    orders_[i].delivered_at_s.reset();
    order_index_.emplace(orders_[i].id, i);
    live_id_stride_ = std::max(live_id_stride_, orders_[i].id + 1);
  }
  if (config_.mode == RunMode::Live) day_template_ = orders_;

  if (inputs.fleet) {
    vehicles_ = *inputs.fleet;
    std::sort(vehicles_.begin(), vehicles_.end(), [](const Vehicle& a, const Vehicle& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < vehicles_.size(); ++i) {
      const auto& v = vehicles_[i];
      if (v.state != VehicleState::Idle || !net_->contains(v.node) || v.battery_km < 0.0 ||
          v.battery_km > config_.spec.range_km || (i > 0 && vehicles_[i - 1].id == v.id)) {
        throw InvalidConfig("pre-placed vehicle " + std::to_string(v.id) + " is invalid");
      }
    }
    config_.fleet_size = vehicles_.size();
  } else {
    vehicles_ = init_fleet(config_.fleet_size, config_.spec, *net_, config_.seed);
  }
  next_vehicle_id_ = vehicles_.empty() ? 0 : vehicles_.back().id + 1;
  fleet_target_ = vehicles_.size();
  for (const auto& v : vehicles_) record_vehicle(v, trace_state::kNone, code(VehicleState::Idle), 0.0);
}

Vehicle& Engine::vehicle(VehicleId id) {
  auto it = std::lower_bound(vehicles_.begin(), vehicles_.end(), id,
                             [](const Vehicle& v, VehicleId x) { return v.id < x; });
  if (it == vehicles_.end() || it->id != id) throw Error("unknown vehicle " + std::to_string(id));
  return *it;
}

Station& Engine::station(StationId id) {
  auto it = std::lower_bound(stations_.begin(), stations_.end(), id,
                             [](const Station& s, StationId x) { return s.id < x; });
  if (it == stations_.end() || it->id != id) throw Error("unknown station " + std::to_string(id));
  return *it;
}

Order& Engine::order(OrderId id) { return orders_[order_index_.at(id)]; }

void Engine::record(const TraceRecord& r) {
  trace_.records.push_back(r);
  last_activity_s_ = clock_;
}

void Engine::record_vehicle(const Vehicle& v, std::int8_t from, std::int8_t to, double leg_km) {
  record({clock_, EntityKind::Vehicle, v.id, from, to, leg_km});
}

void Engine::transition(Vehicle& v, VehicleState to) {
  if (!transition_allowed(v.state, to)) {
    throw Error(std::string("forbidden vehicle transition ") + to_string(v.state) + " -> " + to_string(to));
  }
  record_vehicle(v, code(v.state), code(to), v.leg_km);
  v.leg_km = 0.0;
  v.state = to;
}

void Engine::transition(Order& o, OrderState to) {
  record({clock_, EntityKind::Order, o.id, code(o.state), code(to), 0.0});
  o.state = to;
}

StateCounts Engine::state_counts() const {
  StateCounts c{};
  for (const auto& v : vehicles_) ++c[static_cast<std::size_t>(v.state)];
  return c;
}

bool Engine::finished() const {
  return config_.mode == RunMode::Batch && next_release_ == orders_.size() && delivered_ == orders_.size();
}

void Engine::tick() {
  clock_ = static_cast<double>(tick_index_) * config_.tick_s;

  release_orders();
  std::vector<VehicleEvent> events;
  if (tick_index_ > 0) events = advance_all();
  for (const auto& e : events) {
    if (e.kind != VehicleEventKind::Arrived) continue;
    Vehicle& v = vehicle(e.vehicle);
    if (v.state == VehicleState::ToDelivery) {
      handle_trip_arrival(v);
    } else if (v.state == VehicleState::ToPickup) {
      handle_trip_arrival(v);
      // Pickup takes no time: the rest of the step goes into the delivery leg.
      const double rest_s = clock_ - e.at_s;
      if (v.state == VehicleState::ToDelivery && rest_s > 0.0) {
        const auto more = advance(v, rest_s, config_.spec, clock_);
        if (!more.empty()) handle_trip_arrival(v);
      }
    }
  }
  phase_stations(events);
  phase_night();
  phase_low_battery();
  reap_retired();
  drop_stale_orders();
  phase_dispatch();
  if (config_.mode == RunMode::Batch) samples_.push_back(state_counts());

  if (!waiting_.empty() && clock_ - last_activity_s_ > config_.stall_after_s) {
    throw Stalled("no progress for " + std::to_string(clock_ - last_activity_s_) + " s with " +
                  std::to_string(waiting_.size()) + " orders waiting");
  }
  ++tick_index_;
}

void Engine::release_orders() {
  while (true) {
    if (next_release_ == orders_.size()) {
      if (config_.mode != RunMode::Live || day_template_.empty()) break;
      // Live sessions replay the one-day demand every day.
      ++replayed_days_;
      for (Order o : day_template_) {
        o.id += replayed_days_ * live_id_stride_;
        o.placed_at_s += static_cast<double>(replayed_days_) * 86400.0;
        order_index_.emplace(o.id, orders_.size());
        orders_.push_back(o);
      }
    }
    Order& o = orders_[next_release_];
    if (o.placed_at_s > clock_) break;
    // Stamped with the placement time so waits are measured from placement.
    record({o.placed_at_s, EntityKind::Order, o.id, trace_state::kNone, code(OrderState::Waiting), 0.0});
    waiting_.push_back(next_release_);
    ++next_release_;
  }
}

std::vector<VehicleEvent> Engine::advance_all() {
  const double dt = config_.tick_s;
  const std::size_t n = vehicles_.size();
  const std::size_t workers = std::min(config_.advance_threads, std::max<std::size_t>(n, 1));
  std::vector<VehicleEvent> events;
  if (workers <= 1) {
    for (auto& v : vehicles_) {
      auto ev = advance(v, dt, config_.spec, clock_);
      events.insert(events.end(), ev.begin(), ev.end());
    }
  } else {
    std::vector<std::vector<VehicleEvent>> parts(workers);
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          const std::size_t lo = n * w / workers;
          const std::size_t hi = n * (w + 1) / workers;
          for (std::size_t i = lo; i < hi; ++i) {
            auto ev = advance(vehicles_[i], dt, config_.spec, clock_);
            parts[w].insert(parts[w].end(), ev.begin(), ev.end());
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    for (const auto& p : parts) events.insert(events.end(), p.begin(), p.end());
  }
  std::stable_sort(events.begin(), events.end(), event_order);
  return events;
}

void Engine::handle_trip_arrival(Vehicle& v) {
  Order& o = order(*v.assigned_order);
  if (v.state == VehicleState::ToPickup) {
    o.picked_up_at_s = clock_;
    transition(o, OrderState::InTransit);
    transition(v, VehicleState::ToDelivery);
    set_route(v, router_.path(v.node, o.destination_node));
    return;
  }
  o.delivered_at_s = clock_;
  transition(o, OrderState::Delivered);
  ++delivered_;
  v.assigned_order.reset();
  ++v.trips_completed;
  set_route(v, {});
  if (!v.retiring && needs_charge(v, config_.spec)) {
    // Station chosen in phase 4.
    v.station.reset();
    transition(v, VehicleState::ToCharge);
  } else {
    transition(v, VehicleState::Idle);
  }
}

void Engine::enter_station(Vehicle& v) {
  Station& s = station(*v.station);
  const double leg = v.leg_km;
  arrive_at_station(v, s, config_.spec, clock_);
  if (v.state == VehicleState::Charging) {
    record_vehicle(v, code(VehicleState::ToCharge), code(VehicleState::Charging), leg);
    v.leg_km = 0.0;
  }
}

void Engine::phase_stations(const std::vector<VehicleEvent>& events) {
  for (const auto& e : events) {
    if (e.kind != VehicleEventKind::ChargeComplete) continue;
    Vehicle& v = vehicle(e.vehicle);
    const StationId sid = *v.station;
    record_vehicle(v, code(VehicleState::Charging), code(VehicleState::Idle), v.leg_km);
    v.leg_km = 0.0;
    finish_charge(v, config_.spec);
    release_slot(station(sid), v.id);
  }
  const VehicleLookup lookup = [this](VehicleId id) -> Vehicle& { return vehicle(id); };
  for (auto& s : stations_) {
    std::vector<double> legs;
    for (auto id : s.queue) legs.push_back(vehicle(id).leg_km);
    const auto admitted = admit_from_queue(s, lookup, config_.spec, clock_);
    for (std::size_t i = 0; i < admitted.size(); ++i) {
      Vehicle& v = vehicle(admitted[i]);
      record_vehicle(v, code(VehicleState::ToCharge), code(VehicleState::Charging), legs[i]);
      v.leg_km = 0.0;
    }
  }
  for (const auto& e : events) {
    if (e.kind != VehicleEventKind::Arrived) continue;
    Vehicle& v = vehicle(e.vehicle);
    if (v.state == VehicleState::ToCharge && !v.queued && v.station) enter_station(v);
  }
}

void Engine::phase_night() {
  if (!config_.strategy.night_charging()) return;
  const auto ids = night_charge_sweep(clock_, vehicles_, config_.spec, config_.strategy);
  for (const auto id : ids) {
    Vehicle& v = vehicle(id);
    if (v.retiring) continue;
    v.night_charged_day = day_of(clock_);
    v.station.reset();
    transition(v, VehicleState::ToCharge);
  }
}

void Engine::phase_low_battery() {
  for (auto& v : vehicles_) {
    if (v.state == VehicleState::Idle && !v.retiring && needs_charge(v, config_.spec)) {
      v.station.reset();
      transition(v, VehicleState::ToCharge);
    }
  }
  for (auto& v : vehicles_) {
    if (v.state != VehicleState::ToCharge || v.station) continue;
    const StationId sid = select_station(v, stations_, router_);
    v.station = sid;
    set_route(v, router_.path(v.node, station(sid).node));
    if (v.path.empty()) enter_station(v);
  }
}

void Engine::reap_retired() {
  for (std::size_t i = vehicles_.size(); i-- > 0;) {
    if (vehicles_[i].retiring && vehicles_[i].state == VehicleState::Idle) remove_vehicle(i);
  }
}

void Engine::drop_stale_orders() {
  if (config_.mode != RunMode::Live) return;
  std::vector<std::size_t> keep;
  keep.reserve(waiting_.size());
  for (const auto idx : waiting_) {
    Order& o = orders_[idx];
    if (clock_ - o.placed_at_s >= config_.live_drop_after_s) {
      transition(o, OrderState::Dropped);
    } else {
      keep.push_back(idx);
    }
  }
  waiting_ = std::move(keep);
}

void Engine::phase_dispatch() {
  if (waiting_.empty()) return;
  std::vector<const Vehicle*> idle;
  for (const auto& v : vehicles_) {
    if (v.state == VehicleState::Idle && !v.retiring) idle.push_back(&v);
  }
  std::vector<std::size_t> still_waiting;
  std::size_t i = 0;
  for (; i < waiting_.size() && !idle.empty(); ++i) {
    Order& o = orders_[waiting_[i]];
    const auto chosen = dispatcher_->assign(o, idle, config_.spec, config_.policy);
    if (!chosen) {
      still_waiting.push_back(waiting_[i]);
      continue;
    }
    Vehicle& v = vehicle(*chosen);
    idle.erase(std::find(idle.begin(), idle.end(), &v));
    assign(v, o);
  }
  for (; i < waiting_.size(); ++i) still_waiting.push_back(waiting_[i]);
  waiting_ = std::move(still_waiting);
}

void Engine::assign(Vehicle& v, Order& o) {
  o.assigned_at_s = clock_;
  transition(o, OrderState::Assigned);
  v.assigned_order = o.id;
  transition(v, VehicleState::ToPickup);
  set_route(v, router_.path(v.node, o.restaurant_node));
  if (v.path.empty()) handle_trip_arrival(v);
}

void Engine::finalize() {
  for (auto& v : vehicles_) {
    record_vehicle(v, code(v.state), trace_state::kFinal, v.leg_km);
    v.leg_km = 0.0;
  }
}

void Engine::add_vehicle() {
  Vehicle v = spawn_vehicle(next_vehicle_id_++, config_.spec, *net_, spawn_rng_);
  record_vehicle(v, trace_state::kNone, code(VehicleState::Idle), 0.0);
  vehicles_.push_back(std::move(v));
}

void Engine::remove_vehicle(std::size_t index) {
  const Vehicle& v = vehicles_[index];
  record_vehicle(v, code(v.state), trace_state::kRemoved, v.leg_km);
  vehicles_.erase(vehicles_.begin() + static_cast<std::ptrdiff_t>(index));
}

void Engine::set_fleet_target(std::size_t n) {
  if (n < 1) throw InvalidConfig("fleet size must be >= 1");
  fleet_target_ = n;
  auto active = static_cast<std::size_t>(
      std::count_if(vehicles_.begin(), vehicles_.end(), [](const Vehicle& v) { return !v.retiring; }));
  // Growing: take back vehicles that were due to leave, then spawn.
  for (auto& v : vehicles_) {
    if (active >= n) break;
    if (v.retiring) {
      v.retiring = false;
      ++active;
    }
  }
  while (active < n) {
    add_vehicle();
    ++active;
  }
  // Shrinking: idle vehicles go now, busy ones after their current task.
  for (std::size_t i = 0; i < vehicles_.size() && active > n;) {
    if (!vehicles_[i].retiring && vehicles_[i].state == VehicleState::Idle) {
      remove_vehicle(i);
      --active;
    } else {
      ++i;
    }
  }
  for (auto& v : vehicles_) {
    if (active <= n) break;
    if (!v.retiring) {
      v.retiring = true;
      --active;
    }
  }
}

void Engine::set_spec(const VehicleSpec& spec) {
  spec.validate();
  for (auto& v : vehicles_) {
    const double frac = v.battery_km / config_.spec.range_km;
    v.battery_km = std::clamp(frac, 0.0, 1.0) * spec.range_km;
  }
  config_.spec = spec;
}

void Engine::set_charging(const ChargingStrategy& strategy, const DispatchPolicy& policy) {
  strategy.validate();
  policy.validate();
  config_.strategy = strategy;
  config_.policy = policy;
  config_.spec.charge_kind = strategy.station_kind();
  for (auto& s : stations_) s.kind = strategy.station_kind();
}

void Engine::record_control(const std::string& payload) {
  trace_.controls.push_back(payload);
  record({clock_, EntityKind::Control, static_cast<std::int64_t>(trace_.controls.size() - 1), trace_state::kNone,
          trace_state::kNone, 0.0});
}

RunResult run(const ScenarioConfig& config, const ScenarioInputs& inputs) {
  if (config.mode != RunMode::Batch) throw InvalidConfig("run() needs a Batch configuration");
  Engine engine(config, inputs);
  do {
    engine.tick();
  } while (!engine.finished());
  engine.finalize();
  RunResult r;
  r.report = compute_metrics(engine.trace());
  r.trace = engine.trace();
  r.engine_samples = engine.samples();
  return r;
}

RunResult run(const ScenarioConfig& config) { return run(config, load_inputs(config)); }

}  // namespace fleetsim
