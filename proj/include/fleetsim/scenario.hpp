#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fleetsim/charging.hpp"
#include "fleetsim/demand.hpp"
#include "fleetsim/dispatch.hpp"
#include "fleetsim/fleet.hpp"
#include "fleetsim/network.hpp"

namespace fleetsim {

enum class ScenarioKind { ICE, BEV, CC, NC, SD, FC };
enum class RunMode { Batch, Live };

const char* to_string(ScenarioKind k);
ScenarioKind scenario_from_string(const std::string& s);

/// Settings only the live session reads.
struct LiveOptions {
  double window_s = 12 * 3600.0;
  double window_sample_s = 60.0;
  double snapshot_hz = 10.0;
  /// Simulated seconds per wall-clock second.
  double time_scale = 60.0;
  std::size_t current_ice_fleet = 40;
  std::size_t current_bev_fleet = 45;
  double small_battery_km = 35.0;
  double large_battery_km = 65.0;
};

/// Everything needed to reproduce one run.
struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::CC;
  std::size_t fleet_size = 20;
  VehicleSpec spec = VehicleSpec::slav();
  DispatchPolicy policy;
  ChargingStrategy strategy;

  std::filesystem::path network_file;
  std::filesystem::path stations_file;
  /// Either an orders file or a profile for the synthetic generator.
  std::filesystem::path orders_file;
  std::filesystem::path profile_file;
  std::uint64_t demand_seed = 1;
  std::optional<std::size_t> total_orders;
  std::filesystem::path coefficients_file;

  double tick_s = 5.0;
  std::uint64_t seed = 1;
  RunMode mode = RunMode::Batch;
  double live_drop_after_s = 2400.0;
  /// Worker threads for the vehicle advance phase; 1 = sequential.
  std::size_t advance_threads = 1;
  /// A Batch run with waiting orders and no trace activity for this long is Stalled.
  double stall_after_s = 86400.0;

  LiveOptions live;

  /// Throws InvalidConfig.
  void validate() const;

  /// Scenario row defaults: vehicle class, charge kind, dispatch policy and
  /// night charging. Keeps file paths, seeds and fleet size.
  void apply_scenario(ScenarioKind kind);
};

/// Key-value text, `key = value`, `#` comments. `scenario` is applied first
/// so other keys override its defaults regardless of order. Relative paths
/// resolve against `base_dir`.
ScenarioConfig parse_config(std::istream& in, const std::filesystem::path& base_dir,
                            const std::string& source = "<config>");
ScenarioConfig load_config(const std::filesystem::path& file);

/// Applies one `key`,`value` pair; used by the parser and CLI overrides.
void set_config_value(ScenarioConfig& config, const std::string& key, const std::string& value,
                      const std::filesystem::path& base_dir = {});

/// Loaded, validated inputs; shareable between runs.
struct ScenarioInputs {
  std::shared_ptr<const RoadNetwork> network;
  std::vector<Station> stations;
  std::vector<Order> orders;
  /// Pre-placed Idle vehicles; replaces the random placement when set.
  std::optional<std::vector<Vehicle>> fleet;
};

ScenarioInputs load_inputs(const ScenarioConfig& config);

}  // namespace fleetsim
