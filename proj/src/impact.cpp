#include "fleetsim/impact.hpp"

#include <fstream>
#include <set>

#include "fleetsim/errors.hpp"
#include "text_util.hpp"

namespace fleetsim {

void EmissionModel::validate() const {
  if (per_km_g < 0.0 || per_vehicle_day_g < 0.0 || per_battery_km_day_g < 0.0) {
    throw InvalidConfig("emission coefficients must be >= 0");
  }
  if (battery_multiplier != 1 && battery_multiplier != 2) throw InvalidConfig("battery multiplier must be 1 or 2");
}

double gco2_per_km(const EmissionModel& model, double fleet_size, double range_km, double total_km, double days) {
  if (!(total_km > 0.0)) throw ZeroDistance();
  const double per_vehicle = model.per_vehicle_day_g + model.battery_multiplier * model.per_battery_day_g(range_km);
  return (fleet_size * days * per_vehicle + model.per_km_g * total_km) / total_km;
}

double reduction_vs_baseline(double g_scenario, double km_scenario, double g_base, double km_base) {
  if (!(g_scenario > 0.0 && km_scenario > 0.0 && g_base > 0.0 && km_base > 0.0)) {
    throw NonPositiveInput("reduction inputs must all be positive");
  }
  return 100.0 * (1.0 - (g_scenario * km_scenario) / (g_base * km_base));
}

EmissionModel EmissionCoefficients::model(Grid grid, ChargeKind charge_kind) const {
  EmissionModel m;
  m.per_km_g = grid == Grid::USMix ? per_km_g : per_km_g_renewable;
  m.per_vehicle_day_g = per_vehicle_day_g;
  m.per_battery_km_day_g = per_battery_km_day_g;
  m.battery_multiplier = charge_kind == ChargeKind::Swap ? 2 : 1;
  m.validate();
  return m;
}

EmissionCoefficients parse_coefficients(std::istream& in, const std::string& source) {
  EmissionCoefficients c;
  const std::pair<const char*, double*> keys[] = {
      {"per_km_g", &c.per_km_g},
      {"per_km_g_renewable", &c.per_km_g_renewable},
      {"per_vehicle_day_g", &c.per_vehicle_day_g},
      {"per_battery_km_day_g", &c.per_battery_km_day_g},
      {"baseline_ice_g_per_km", &c.ice.g_per_km},
      {"baseline_ice_km", &c.ice.km},
      {"baseline_bev_us_mix_g_per_km", &c.bev_us_mix.g_per_km},
      {"baseline_bev_renewable_g_per_km", &c.bev_renewable.g_per_km},
      {"baseline_bev_km", &c.bev_us_mix.km},
  };
  std::set<std::string> seen;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = detail::strip_comment(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected key = value");
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));
    double* target = nullptr;
    for (const auto& [name, ptr] : keys) {
      if (key == name) target = ptr;
    }
    if (target == nullptr) throw ParseError(source, line_no, "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ParseError(source, line_no, "duplicate key '" + key + "'");
    try {
      *target = detail::to_double(value);
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, line_no, e.what());
    }
    if (*target < 0.0) throw ParseError(source, line_no, "coefficients must be >= 0");
  }
  c.bev_renewable.km = c.bev_us_mix.km;
  return c;
}

EmissionCoefficients load_coefficients(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError(file.string(), 0, "cannot open file");
  return parse_coefficients(in, file.string());
}

ImpactRow assess(const EmissionCoefficients& c, const VehicleSpec& spec, double fleet_size, double total_km,
                 double days) {
  ImpactRow row;
  row.gco2_per_km = gco2_per_km(c.model(Grid::USMix, spec.charge_kind), fleet_size, spec.range_km, total_km, days);
  row.gco2_per_km_renewable =
      gco2_per_km(c.model(Grid::Renewable, spec.charge_kind), fleet_size, spec.range_km, total_km, days);
  row.red_vs_ice_pct = reduction_vs_baseline(row.gco2_per_km, total_km, c.ice.g_per_km, c.ice.km);
  row.red_vs_bev_renewable_pct =
      reduction_vs_baseline(row.gco2_per_km_renewable, total_km, c.bev_renewable.g_per_km, c.bev_renewable.km);
  return row;
}

}  // namespace fleetsim
