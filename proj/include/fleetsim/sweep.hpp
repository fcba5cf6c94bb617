#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fleetsim/engine.hpp"
#include "fleetsim/impact.hpp"
#include "fleetsim/metrics.hpp"
#include "fleetsim/scenario.hpp"

namespace fleetsim {

struct FleetProbe {
  std::size_t fleet_size = 0;
  bool met = false;
  /// Share of orders under 40 min; an upper bound when the run was cut short.
  double pct_under_40min = 0.0;
  /// Why the probe failed early (stalled, stopped once the criterion was lost).
  std::string note;
};

struct MinFleetResult {
  /// Empty means NotFound.
  std::optional<std::size_t> fleet_size;
  std::vector<FleetProbe> probes;
  double best_pct_under_40min = 0.0;
  std::size_t best_fleet = 0;

  bool found() const { return fleet_size.has_value(); }
};

/// Runs one Batch configuration far enough to decide service_level_met.
/// Stops early once more than 5% of the orders are known to be late.
FleetProbe probe_service_level(const ScenarioConfig& config, const ScenarioInputs& inputs);

/// Smallest fleet on fleet_min, fleet_min + step, ... <= fleet_max meeting
/// the service criterion. Ascending scan with early stop, shared demand.
MinFleetResult find_min_fleet(const ScenarioConfig& base, const ScenarioInputs& inputs, std::size_t fleet_min,
                              std::size_t fleet_max, std::size_t step = 10);

struct GridRow {
  ScenarioConfig config;
  std::optional<MetricsReport> report;
  std::optional<ImpactRow> impact;
  std::string error;
};

/// One row per config, in input order, independent of `workers`.
/// Impact columns are filled when `coefficients` is given and the run is a SLAV run.
std::vector<GridRow> run_grid(const std::vector<ScenarioConfig>& configs, std::size_t workers = 1,
                              const std::optional<EmissionCoefficients>& coefficients = std::nullopt);

void write_grid_csv(std::ostream& out, const std::vector<GridRow>& rows);

/// Battery x speed cells for one strategy, keeping everything else from `base`.
std::vector<ScenarioConfig> battery_speed_grid(const ScenarioConfig& base, ScenarioKind scenario,
                                               const std::vector<double>& batteries_km,
                                               const std::vector<double>& speeds_kmh);

struct StrategyFleetRow {
  double battery_km = 0.0;
  double speed_kmh = 0.0;
  /// Minimum fleet per strategy in CC, NC, SD, FC order; empty when NotFound.
  std::vector<std::optional<std::size_t>> fleets;
  /// 100 * (F - F_CC) / F_CC for NC, SD, FC; empty when either side is missing.
  std::vector<std::optional<double>> delta_vs_cc_pct;
};

/// Min-fleet search for every strategy in every battery x speed cell.
std::vector<StrategyFleetRow> strategy_fleet_table(const ScenarioConfig& base, const ScenarioInputs& inputs,
                                                   const std::vector<double>& batteries_km,
                                                   const std::vector<double>& speeds_kmh, std::size_t fleet_min,
                                                   std::size_t fleet_max, std::size_t step, std::size_t workers = 1);

void write_strategy_fleet_csv(std::ostream& out, const std::vector<StrategyFleetRow>& rows);

/// Percentage change of `fleet` against `reference`.
double fleet_delta_pct(std::size_t fleet, std::size_t reference);

}  // namespace fleetsim
