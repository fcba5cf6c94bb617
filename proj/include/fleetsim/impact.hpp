#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "fleetsim/fleet.hpp"

namespace fleetsim {

enum class Grid { USMix, Renewable };

/// Amortized manufacturing plus use-phase CO2 for one vehicle type and grid.
struct EmissionModel {
  double per_km_g = 0.0;
  double per_vehicle_day_g = 0.0;
  /// Battery manufacturing per km of range per day.
  double per_battery_km_day_g = 0.0;
  /// 2 when every vehicle needs a spare battery for swapping.
  int battery_multiplier = 1;

  double per_battery_day_g(double range_km) const { return per_battery_km_day_g * range_km; }
  /// Throws InvalidConfig.
  void validate() const;
};

/// (fleet * days * (vehicle + multiplier * battery) + per_km * km) / km.
/// Throws ZeroDistance.
double gco2_per_km(const EmissionModel& model, double fleet_size, double range_km, double total_km,
                   double days = 1.0);

/// 100 * (1 - g*km / (g_base*km_base)). Throws NonPositiveInput.
double reduction_vs_baseline(double g_scenario, double km_scenario, double g_base, double km_base);

struct Baseline {
  double g_per_km = 0.0;
  double km = 0.0;
};

/// Coefficient file contents: the SLAV model per grid and the car baselines.
struct EmissionCoefficients {
  double per_km_g = 0.0;
  double per_km_g_renewable = 0.0;
  double per_vehicle_day_g = 0.0;
  double per_battery_km_day_g = 0.0;
  Baseline ice;
  Baseline bev_us_mix;
  Baseline bev_renewable;

  EmissionModel model(Grid grid, ChargeKind charge_kind) const;
};

/// `key = value` lines, `#` comments. Unknown keys are errors.
EmissionCoefficients parse_coefficients(std::istream& in, const std::string& source = "<coefficients>");
EmissionCoefficients load_coefficients(const std::filesystem::path& file);

struct ImpactRow {
  double gco2_per_km = 0.0;
  double gco2_per_km_renewable = 0.0;
  double red_vs_ice_pct = 0.0;
  double red_vs_bev_renewable_pct = 0.0;
};

/// Impact columns for one SLAV run: US mix compared with the ICE baseline,
/// renewable grid compared with the renewable BEV baseline.
ImpactRow assess(const EmissionCoefficients& coefficients, const VehicleSpec& spec, double fleet_size,
                 double total_km, double days = 1.0);

}  // namespace fleetsim
