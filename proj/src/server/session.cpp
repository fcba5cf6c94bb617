#include "fleetsim/server/session.hpp"

#include <algorithm>
#include <cmath>

#include "fleetsim/errors.hpp"

namespace fleetsim::server {

namespace {

json counts_json(const StateCounts& c) {
  json j = json::object();
  for (std::size_t s = 0; s < kVehicleStateCount; ++s) j[to_string(static_cast<VehicleState>(s))] = c[s];
  return j;
}

}  // namespace

KpiAccumulator::KpiAccumulator(double window_s, double sample_s) : window_s_(window_s), sample_s_(sample_s) {
  if (!(window_s > 0.0 && sample_s > 0.0)) throw InvalidConfig("window and sample interval must be positive");
}

std::int64_t KpiAccumulator::vehicles() const {
  std::int64_t n = 0;
  for (auto c : counts_) n += c;
  return n;
}

void KpiAccumulator::emit_through(double limit_s, bool inclusive) {
  while (true) {
    const double t = static_cast<double>(next_sample_) * sample_s_;
    if (inclusive ? t > limit_s : t >= limit_s) break;
    WaitWindowSample w{t, std::nullopt, interval_delivered_};
    if (interval_delivered_ > 0) w.avg_wait_min = interval_wait_s_ / static_cast<double>(interval_delivered_) / 60.0;
    wait_.push_back(w);
    states_.push_back({t, counts_});
    interval_wait_s_ = 0.0;
    interval_delivered_ = 0;
    ++next_sample_;
    while (!wait_.empty() && wait_.front().t_s <= t - window_s_) wait_.pop_front();
    while (!states_.empty() && states_.front().t_s <= t - window_s_) states_.pop_front();
  }
}

void KpiAccumulator::consume(const TraceRecord& r) {
  if (r.entity == EntityKind::Control) {
    emit_through(r.t_s, true);
    wait_.clear();
    states_.clear();
    unserved_ = 0;
    km_ = 0.0;
    interval_wait_s_ = 0.0;
    interval_delivered_ = 0;
    reset_at_s_ = r.t_s;
    return;
  }
  // Records written while applying a control belong after that tick's sample.
  const bool after_control = reset_at_s_ == r.t_s && next_sample_ > 0;
  emit_through(r.t_s, after_control);
  if (r.entity == EntityKind::Order) {
    if (r.from == trace_state::kNone) {
      placed_at_[r.id] = r.t_s;
      return;
    }
    const auto to = static_cast<OrderState>(r.to);
    if (to == OrderState::Delivered) {
      interval_wait_s_ += r.t_s - placed_at_.at(r.id);
      ++interval_delivered_;
      placed_at_.erase(r.id);
    } else if (to == OrderState::Dropped) {
      ++unserved_;
      placed_at_.erase(r.id);
    }
    return;
  }
  if (r.from >= 0) km_ += r.leg_km;
  if (r.to == trace_state::kFinal) return;
  if (r.from >= 0) --counts_[static_cast<std::size_t>(r.from)];
  if (r.to >= 0) ++counts_[static_cast<std::size_t>(r.to)];
}

void KpiAccumulator::advance_to(double clock_s) { emit_through(clock_s, true); }

KpiAccumulator KpiAccumulator::replay(const EventTrace& trace, std::size_t prefix, double clock_s, double window_s,
                                      double sample_s) {
  KpiAccumulator acc(window_s, sample_s);
  prefix = std::min(prefix, trace.records.size());
  for (std::size_t i = 0; i < prefix; ++i) acc.consume(trace.records[i]);
  acc.advance_to(clock_s);
  return acc;
}

json to_json(const KpiAccumulator& kpi) {
  json wait = json::array();
  for (const auto& w : kpi.wait_window()) {
    wait.push_back({{"t_s", w.t_s},
                    {"avg_wait_min", w.avg_wait_min ? json(*w.avg_wait_min) : json(nullptr)},
                    {"delivered", w.delivered}});
  }
  json states = json::array();
  for (const auto& s : kpi.state_window()) states.push_back({{"t_s", s.t_s}, {"counts", counts_json(s.counts)}});
  return {{"wait_window", std::move(wait)},
          {"state_window", std::move(states)},
          {"unserved_counter", kpi.unserved()}};
}

json Ack::to_json() const {
  if (!ok) return {{"type", "error"}, {"message", error}, {"config_version", config_version}};
  return {{"type", "ack"},
          {"applied", applied},
          {"warnings", warnings},
          {"effective_config", effective_config},
          {"config_version", config_version}};
}

LiveSession::LiveSession(ScenarioConfig config, const ScenarioInputs& inputs,
                         std::optional<EmissionCoefficients> coefficients, ControlLimits limits)
    : base_(std::move(config)),
      coefficients_(std::move(coefficients)),
      limits_(limits),
      kpi_(base_.live.window_s, base_.live.window_sample_s) {
  base_.mode = RunMode::Live;
  engine_ = std::make_unique<Engine>(base_, inputs);
  switch (base_.scenario) {
    case ScenarioKind::ICE: future_ = false; break;
    case ScenarioKind::BEV:
      future_ = false;
      electrified_ = true;
      break;
    default:
      future_ = true;
      strategy_ = base_.strategy.kind;
      break;
  }
  large_battery_ = base_.spec.range_km >= 0.5 * (base_.live.small_battery_km + base_.live.large_battery_km);
  fleet_ = base_.fleet_size;
  speed_kmh_ = base_.spec.vehicle_class == VehicleClass::SLAV ? base_.spec.speed_kmh : 11.0;
  time_scale_ = base_.live.time_scale;
  // Tick 0 runs here, so controls always land between ticks.
  step();
}

void LiveSession::step() {
  std::lock_guard lock(mutex_);
  engine_->tick();
  const auto& records = engine_->trace().records;
  for (; consumed_ < records.size(); ++consumed_) kpi_.consume(records[consumed_]);
  kpi_.advance_to(engine_->clock_s());
}

void LiveSession::run_for(double sim_seconds) {
  const double start = clock_s();
  while (clock_s() < start + sim_seconds) step();
}

bool LiveSession::paused() const {
  std::lock_guard lock(mutex_);
  return paused_;
}

double LiveSession::time_scale() const {
  std::lock_guard lock(mutex_);
  return time_scale_;
}

double LiveSession::tick_s() const { return base_.tick_s; }
double LiveSession::snapshot_hz() const { return base_.live.snapshot_hz; }

std::uint64_t LiveSession::config_version() const {
  std::lock_guard lock(mutex_);
  return config_version_;
}

double LiveSession::clock_s() const {
  std::lock_guard lock(mutex_);
  return engine_->clock_s();
}

std::string LiveSession::label_locked() const {
  if (!future_) return electrified_ ? "BEV" : "ICE";
  return to_string(strategy_);
}

json LiveSession::effective_config_locked() const {
  const auto& spec = engine_->config().spec;
  return {{"scenario", future_ ? "Future" : "Current"},
          {"label", label_locked()},
          {"electrified", electrified_},
          {"strategy", to_string(strategy_)},
          {"battery", large_battery_ ? "large" : "small"},
          {"vehicle_class", to_string(spec.vehicle_class)},
          {"range_km", spec.range_km},
          {"speed_kmh", spec.speed_kmh},
          {"fleet_target", engine_->fleet_target()},
          {"fleet_slider", fleet_},
          {"speed_slider_kmh", speed_kmh_},
          {"paused", paused_},
          {"time_scale", time_scale_},
          {"tick_s", base_.tick_s},
          {"snapshot_hz", base_.live.snapshot_hz},
          {"window_s", base_.live.window_s},
          {"window_sample_s", base_.live.window_sample_s},
          {"drop_after_s", base_.live_drop_after_s},
          {"config_version", config_version_}};
}

json LiveSession::effective_config() const {
  std::lock_guard lock(mutex_);
  return effective_config_locked();
}

void LiveSession::apply_board_locked() {
  if (!future_) {
    const VehicleSpec spec = electrified_ ? VehicleSpec::bev_car() : VehicleSpec::ice_car();
    ChargingStrategy strategy = base_.strategy;
    strategy.kind = StrategyKind::CC;
    DispatchPolicy policy = base_.policy;
    policy.kind = DispatchPolicy::Kind::Nearest;
    engine_->set_spec(spec);
    engine_->set_charging(strategy, policy);
    engine_->set_fleet_target(electrified_ ? base_.live.current_bev_fleet : base_.live.current_ice_fleet);
    engine_->set_scenario_label(electrified_ ? ScenarioKind::BEV : ScenarioKind::ICE);
    return;
  }
  ChargingStrategy strategy = base_.strategy;
  strategy.kind = strategy_;
  DispatchPolicy policy = base_.policy;
  policy.kind = strategy_ == StrategyKind::SD ? DispatchPolicy::Kind::Strategic : DispatchPolicy::Kind::Nearest;
  VehicleSpec spec = base_.spec.vehicle_class == VehicleClass::SLAV ? base_.spec : VehicleSpec::slav();
  spec.range_km = large_battery_ ? base_.live.large_battery_km : base_.live.small_battery_km;
  spec.speed_kmh = speed_kmh_;
  spec.charge_kind = strategy.station_kind();
  engine_->set_spec(spec);
  engine_->set_charging(strategy, policy);
  engine_->set_fleet_target(fleet_);
  engine_->set_scenario_label(scenario_from_string(to_string(strategy_)));
}

Ack LiveSession::apply_control_text(const std::string& text) {
  json message;
  try {
    message = json::parse(text);
  } catch (const json::parse_error& e) {
    Ack ack;
    ack.ok = false;
    ack.error = std::string("malformed JSON: ") + e.what();
    ack.config_version = config_version();
    return ack;
  }
  return apply_control(message);
}

Ack LiveSession::apply_control(const json& message) {
  std::lock_guard lock(mutex_);
  Ack ack;
  auto fail = [&](const std::string& why) {
    ack.ok = false;
    ack.error = why;
    ack.config_version = config_version_;
    return ack;
  };
  if (!message.is_object() || !message.contains("type") || !message["type"].is_string()) {
    return fail("control message needs a string 'type'");
  }
  const std::string type = message["type"];
  const json value = message.value("value", json());
  bool board_change = false;
  auto future_only = [&](const char* what) {
    if (future_) return true;
    ack.warnings.push_back(std::string(what) + " only applies to the Future scenario; ignored");
    return false;
  };

  if (type == "SetScenario") {
    if (!value.is_string() || (value != "Current" && value != "Future")) {
      return fail("SetScenario value must be \"Current\" or \"Future\"");
    }
    future_ = value == "Future";
    board_change = ack.applied = true;
  } else if (type == "SetElectrified") {
    if (!value.is_boolean()) return fail("SetElectrified value must be a boolean");
    if (future_) {
      ack.warnings.push_back("SetElectrified only applies to the Current scenario; ignored");
    } else {
      electrified_ = value.get<bool>();
      board_change = ack.applied = true;
    }
  } else if (type == "SetStrategy") {
    if (!value.is_string()) return fail("SetStrategy value must be a string");
    StrategyKind kind;
    try {
      kind = strategy_from_string(value.get<std::string>());
    } catch (const InvalidConfig& e) {
      return fail(e.what());
    }
    if (future_only("SetStrategy")) {
      strategy_ = kind;
      board_change = ack.applied = true;
    }
  } else if (type == "SetBattery") {
    if (!value.is_string() || (value != "small" && value != "large")) {
      return fail("SetBattery value must be \"small\" or \"large\"");
    }
    if (future_only("SetBattery")) {
      large_battery_ = value == "large";
      board_change = ack.applied = true;
    }
  } else if (type == "SetFleetSize") {
    if (!value.is_number()) return fail("SetFleetSize value must be a number");
    const double requested = value.get<double>();
    const double clamped = std::clamp(std::round(requested), static_cast<double>(limits_.fleet_min),
                                      static_cast<double>(limits_.fleet_max));
    if (clamped != requested) ack.warnings.push_back("fleet size clamped to " + std::to_string(std::lround(clamped)));
    if (future_only("SetFleetSize")) {
      fleet_ = static_cast<std::size_t>(clamped);
      board_change = ack.applied = true;
    }
  } else if (type == "SetSpeed") {
    if (!value.is_number()) return fail("SetSpeed value must be a number");
    const double requested = value.get<double>();
    const double clamped = std::clamp(requested, limits_.speed_min, limits_.speed_max);
    if (clamped != requested) ack.warnings.push_back("speed clamped to " + format_number(clamped) + " km/h");
    if (future_only("SetSpeed")) {
      speed_kmh_ = clamped;
      board_change = ack.applied = true;
    }
  } else if (type == "Pause") {
    paused_ = true;
    ack.applied = true;
  } else if (type == "Resume") {
    paused_ = false;
    ack.applied = true;
  } else if (type == "SetTimeScale") {
    if (!value.is_number() || !(value.get<double>() > 0.0)) return fail("SetTimeScale value must be positive");
    time_scale_ = value.get<double>();
    ack.applied = true;
  } else {
    return fail("unknown control type '" + type + "'");
  }

  if (ack.applied) {
    ++config_version_;
    engine_->record_control(message.dump());
    if (board_change) apply_board_locked();
    const auto& records = engine_->trace().records;
    for (; consumed_ < records.size(); ++consumed_) kpi_.consume(records[consumed_]);
  }
  ack.effective_config = effective_config_locked();
  ack.config_version = config_version_;
  return ack;
}

json LiveSession::snapshot() const {
  std::lock_guard lock(mutex_);
  const auto& net = engine_->network();
  json vehicles = json::array();
  for (const auto& v : engine_->vehicles()) {
    const auto [x, y] = position_xy(v, net);
    vehicles.push_back({{"id", v.id},
                        {"x_m", x},
                        {"y_m", y},
                        {"state", to_string(v.state)},
                        {"carrying_order", v.state == VehicleState::ToDelivery}});
  }
  json waiting = json::array();
  for (const auto idx : engine_->waiting()) {
    const auto& o = engine_->orders()[idx];
    const auto& n = net.node(o.restaurant_node);
    waiting.push_back({{"id", o.id}, {"node", o.restaurant_node}, {"x_m", n.x_m}, {"y_m", n.y_m},
                       {"placed_at_s", o.placed_at_s}});
  }
  json stations = json::array();
  for (const auto& s : engine_->stations()) {
    const auto& n = net.node(s.node);
    stations.push_back({{"id", s.id},
                        {"node", s.node},
                        {"x_m", n.x_m},
                        {"y_m", n.y_m},
                        {"capacity", s.capacity},
                        {"occupancy", s.occupants.size()},
                        {"queue", s.queue.size()}});
  }

  json kpi = to_json(kpi_);
  json gco2 = nullptr;
  json baselines = nullptr;
  if (coefficients_) {
    baselines = {{"ice", coefficients_->ice.g_per_km},
                 {"bev_us_mix", coefficients_->bev_us_mix.g_per_km},
                 {"bev_renewable", coefficients_->bev_renewable.g_per_km}};
    const double days = (engine_->clock_s() - kpi_.reset_at_s()) / 86400.0;
    if (!future_) {
      gco2 = electrified_ ? coefficients_->bev_us_mix.g_per_km : coefficients_->ice.g_per_km;
    } else if (kpi_.km_since_reset() > 0.0 && days > 0.0) {
      const auto& spec = engine_->config().spec;
      gco2 = gco2_per_km(coefficients_->model(Grid::USMix, spec.charge_kind),
                         static_cast<double>(engine_->vehicles().size()), spec.range_km, kpi_.km_since_reset(), days);
    }
  }
  kpi["gco2_per_km"] = gco2;
  kpi["baselines_gco2_per_km"] = baselines;

  return {{"type", "snapshot"},
          {"config_version", config_version_},
          {"sim_clock_s", engine_->clock_s()},
          {"scenario", label_locked()},
          {"paused", paused_},
          {"vehicles", std::move(vehicles)},
          {"waiting_orders", std::move(waiting)},
          {"stations", std::move(stations)},
          {"kpi", std::move(kpi)}};
}

json LiveSession::config_document() const {
  std::lock_guard lock(mutex_);
  const auto& net = engine_->network();
  json nodes = json::array();
  for (const auto& n : net.nodes()) nodes.push_back({{"id", n.id}, {"x_m", n.x_m}, {"y_m", n.y_m}});
  json edges = json::array();
  for (const auto& e : net.edges()) {
    edges.push_back({{"id", e.id}, {"from", e.from}, {"to", e.to}, {"length_m", e.length_m},
                     {"bidirectional", e.bidirectional}});
  }
  json stations = json::array();
  for (const auto& s : engine_->stations()) {
    stations.push_back({{"id", s.id}, {"node", s.node}, {"capacity", s.capacity}});
  }
  return {{"effective_config", effective_config_locked()},
          {"limits",
           {{"fleet_min", limits_.fleet_min},
            {"fleet_max", limits_.fleet_max},
            {"speed_min_kmh", limits_.speed_min},
            {"speed_max_kmh", limits_.speed_max}}},
          {"network", {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}}},
          {"stations", std::move(stations)}};
}

MetricsReport LiveSession::report() const {
  std::lock_guard lock(mutex_);
  return compute_metrics(engine_->trace());
}

EventTrace LiveSession::trace() const {
  std::lock_guard lock(mutex_);
  return engine_->trace();
}

KpiAccumulator LiveSession::kpi() const {
  std::lock_guard lock(mutex_);
  return kpi_;
}

}  // namespace fleetsim::server
