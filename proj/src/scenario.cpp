#include "fleetsim/scenario.hpp"

#include <fstream>
#include <map>
#include <tuple>

#include "fleetsim/errors.hpp"
#include "text_util.hpp"

namespace fleetsim {

const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::ICE: return "ICE";
    case ScenarioKind::BEV: return "BEV";
    case ScenarioKind::CC: return "CC";
    case ScenarioKind::NC: return "NC";
    case ScenarioKind::SD: return "SD";
    case ScenarioKind::FC: return "FC";
  }
  return "?";
}

ScenarioKind scenario_from_string(const std::string& s) {
  if (s == "ICE") return ScenarioKind::ICE;
  if (s == "BEV") return ScenarioKind::BEV;
  if (s == "CC") return ScenarioKind::CC;
  if (s == "NC") return ScenarioKind::NC;
  if (s == "SD") return ScenarioKind::SD;
  if (s == "FC") return ScenarioKind::FC;
  throw InvalidConfig("unknown scenario '" + s + "'");
}

void ScenarioConfig::apply_scenario(ScenarioKind kind) {
  scenario = kind;
  strategy.kind = StrategyKind::CC;
  policy.kind = DispatchPolicy::Kind::Nearest;
  switch (kind) {
    case ScenarioKind::ICE: spec = VehicleSpec::ice_car(); return;
    case ScenarioKind::BEV: spec = VehicleSpec::bev_car(); return;
    default: break;
  }
  const bool was_slav = spec.vehicle_class == VehicleClass::SLAV;
  const double range = was_slav ? spec.range_km : 35.0;
  const double speed = was_slav ? spec.speed_kmh : 11.0;
  strategy.kind = kind == ScenarioKind::NC   ? StrategyKind::NC
                  : kind == ScenarioKind::SD ? StrategyKind::SD
                  : kind == ScenarioKind::FC ? StrategyKind::FC
                                             : StrategyKind::CC;
  if (kind == ScenarioKind::SD) policy.kind = DispatchPolicy::Kind::Strategic;
  const auto min_frac = was_slav ? spec.min_level_frac : 0.25;
  const auto recharge = was_slav ? spec.full_recharge_s : 16200.0;
  const auto swap = was_slav ? spec.swap_s : 111.0;
  spec = VehicleSpec::slav(range, speed, strategy.station_kind());
  spec.min_level_frac = min_frac;
  spec.full_recharge_s = recharge;
  spec.swap_s = swap;
}

void ScenarioConfig::validate() const {
  if (fleet_size < 1) throw InvalidConfig("fleet_size must be >= 1");
  spec.validate();
  policy.validate();
  strategy.validate();
  if (!(tick_s > 0.0)) throw InvalidConfig("tick_s must be positive");
  if (!(live_drop_after_s > 0.0)) throw InvalidConfig("live_drop_after_s must be positive");
  if (!(stall_after_s > 0.0)) throw InvalidConfig("stall_after_s must be positive");
  if (advance_threads < 1) throw InvalidConfig("advance_threads must be >= 1");
  const bool slav = spec.vehicle_class == VehicleClass::SLAV;
  const bool car_scenario = scenario == ScenarioKind::ICE || scenario == ScenarioKind::BEV;
  if (slav == car_scenario) throw InvalidConfig("vehicle class does not match scenario");
  if (scenario == ScenarioKind::FC && spec.charge_kind != ChargeKind::Swap) {
    throw InvalidConfig("FC scenario requires swap charging");
  }
  if (scenario != ScenarioKind::FC && spec.charge_kind == ChargeKind::Swap) {
    throw InvalidConfig("swap charging is only used by the FC scenario");
  }
  if (!(live.window_s > 0.0 && live.window_sample_s > 0.0 && live.snapshot_hz > 0.0 && live.time_scale > 0.0)) {
    throw InvalidConfig("live options must be positive");
  }
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  std::filesystem::path p(value);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal();
}

double number(const std::string& key, const std::string& value) {
  try {
    return detail::to_double(value);
  } catch (const std::invalid_argument&) {
    throw InvalidConfig("key '" + key + "': not a number: '" + value + "'");
  }
}

std::size_t count(const std::string& key, const std::string& value) {
  try {
    const auto v = detail::to_int(value);
    if (v < 0) throw std::invalid_argument("negative");
    return static_cast<std::size_t>(v);
  } catch (const std::invalid_argument&) {
    throw InvalidConfig("key '" + key + "': not a non-negative integer: '" + value + "'");
  }
}

}  // namespace

void set_config_value(ScenarioConfig& c, const std::string& key, const std::string& value,
                      const std::filesystem::path& base_dir) {
  if (key == "scenario") {
    c.apply_scenario(scenario_from_string(value));
  } else if (key == "fleet_size") {
    c.fleet_size = count(key, value);
  } else if (key == "speed_kmh") {
    c.spec.speed_kmh = number(key, value);
  } else if (key == "range_km") {
    c.spec.range_km = number(key, value);
  } else if (key == "min_level_frac") {
    c.spec.min_level_frac = number(key, value);
  } else if (key == "full_recharge_s") {
    c.spec.full_recharge_s = number(key, value);
  } else if (key == "swap_s") {
    c.spec.swap_s = number(key, value);
  } else if (key == "dispatch") {
    if (value == "nearest") {
      c.policy.kind = DispatchPolicy::Kind::Nearest;
    } else if (value == "strategic") {
      c.policy.kind = DispatchPolicy::Kind::Strategic;
    } else {
      throw InvalidConfig("dispatch must be nearest or strategic");
    }
  } else if (key == "candidate_count") {
    c.policy.candidate_count = count(key, value);
  } else if (key == "battery_exponent") {
    c.policy.battery_exponent = number(key, value);
  } else if (key == "night_start_s") {
    c.strategy.night_start_s = number(key, value);
  } else if (key == "night_end_s") {
    c.strategy.night_end_s = number(key, value);
  } else if (key == "night_trigger_frac") {
    c.strategy.night_trigger_frac = number(key, value);
  } else if (key == "network") {
    c.network_file = resolve(base_dir, value);
  } else if (key == "stations") {
    c.stations_file = resolve(base_dir, value);
  } else if (key == "orders") {
    c.orders_file = resolve(base_dir, value);
  } else if (key == "profile") {
    c.profile_file = resolve(base_dir, value);
  } else if (key == "coefficients") {
    c.coefficients_file = resolve(base_dir, value);
  } else if (key == "demand_seed") {
    c.demand_seed = count(key, value);
  } else if (key == "total_orders") {
    c.total_orders = count(key, value);
  } else if (key == "tick_s") {
    c.tick_s = number(key, value);
  } else if (key == "seed") {
    c.seed = count(key, value);
  } else if (key == "mode") {
    if (value == "batch") {
      c.mode = RunMode::Batch;
    } else if (value == "live") {
      c.mode = RunMode::Live;
    } else {
      throw InvalidConfig("mode must be batch or live");
    }
  } else if (key == "live_drop_after_s") {
    c.live_drop_after_s = number(key, value);
  } else if (key == "advance_threads") {
    c.advance_threads = count(key, value);
  } else if (key == "stall_after_s") {
    c.stall_after_s = number(key, value);
  } else if (key == "window_s") {
    c.live.window_s = number(key, value);
  } else if (key == "window_sample_s") {
    c.live.window_sample_s = number(key, value);
  } else if (key == "snapshot_hz") {
    c.live.snapshot_hz = number(key, value);
  } else if (key == "time_scale") {
    c.live.time_scale = number(key, value);
  } else if (key == "current_ice_fleet") {
    c.live.current_ice_fleet = count(key, value);
  } else if (key == "current_bev_fleet") {
    c.live.current_bev_fleet = count(key, value);
  } else if (key == "small_battery_km") {
    c.live.small_battery_km = number(key, value);
  } else if (key == "large_battery_km") {
    c.live.large_battery_km = number(key, value);
  } else {
    throw InvalidConfig("unknown config key '" + key + "'");
  }
}

ScenarioConfig parse_config(std::istream& in, const std::filesystem::path& base_dir, const std::string& source) {
  std::vector<std::tuple<std::size_t, std::string, std::string>> entries;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = detail::strip_comment(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected key = value");
    entries.emplace_back(line_no, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  ScenarioConfig c;
  auto apply = [&](auto&& pred) {
    for (const auto& [no, key, value] : entries) {
      if (!pred(key)) continue;
      try {
        set_config_value(c, key, value, base_dir);
      } catch (const InvalidConfig& e) {
        throw ParseError(source, no, e.what());
      }
    }
  };
  apply([](const std::string& k) { return k == "scenario"; });
  apply([](const std::string& k) { return k != "scenario"; });
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError(file.string(), 0, "cannot open file");
  return parse_config(in, file.parent_path(), file.string());
}

ScenarioInputs load_inputs(const ScenarioConfig& config) {
  if (config.network_file.empty()) throw InvalidConfig("no network file configured");
  if (config.stations_file.empty()) throw InvalidConfig("no stations file configured");
  ScenarioInputs in;
  in.network = std::make_shared<const RoadNetwork>(load_network(config.network_file));
  in.stations = load_stations(config.stations_file, *in.network);
  if (!config.orders_file.empty()) {
    in.orders = ingest_orders(config.orders_file, *in.network);
  } else if (!config.profile_file.empty()) {
    auto profile = load_profile(config.profile_file);
    if (config.total_orders) profile.total_orders = *config.total_orders;
    check_profile_nodes(profile, *in.network);
    in.orders = generate_synthetic(profile, config.demand_seed);
  } else {
    throw InvalidConfig("either orders or profile must be configured");
  }
  return in;
}

}  // namespace fleetsim
