#include "fleetsim/charging.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "fleetsim/errors.hpp"
#include "text_util.hpp"

namespace fleetsim {

const char* to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::CC: return "CC";
    case StrategyKind::NC: return "NC";
    case StrategyKind::SD: return "SD";
    case StrategyKind::FC: return "FC";
  }
  return "?";
}

StrategyKind strategy_from_string(const std::string& s) {
  if (s == "CC") return StrategyKind::CC;
  if (s == "NC") return StrategyKind::NC;
  if (s == "SD") return StrategyKind::SD;
  if (s == "FC") return StrategyKind::FC;
  throw InvalidConfig("unknown charging strategy '" + s + "'");
}

void ChargingStrategy::validate() const {
  if (!(night_start_s < night_end_s)) throw InvalidConfig("night window start must precede end");
  if (!(night_trigger_frac > 0.0 && night_trigger_frac <= 1.0)) {
    throw InvalidConfig("night trigger fraction must lie in (0, 1]");
  }
}

std::vector<Station> parse_stations(std::istream& in, const RoadNetwork& net, const std::string& source) {
  std::vector<Station> stations;
  std::set<StationId> ids;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = detail::strip_comment(raw);
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != 5 || f[0] != "S") throw ParseError(source, line_no, "station record needs 5 fields");
    Station s;
    try {
      s.id = detail::to_int(f[1]);
      s.node = detail::to_int(f[2]);
      s.capacity = static_cast<int>(detail::to_int(f[3]));
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, line_no, e.what());
    }
    if (f[4] == "Plug") {
      s.kind = ChargeKind::Plug;
    } else if (f[4] == "Swap") {
      s.kind = ChargeKind::Swap;
    } else {
      throw ParseError(source, line_no, "station kind must be Plug or Swap");
    }
    if (s.capacity < 1) throw ParseError(source, line_no, "station capacity must be >= 1");
    if (!net.contains(s.node)) throw UnknownNode(s.node, line_no);
    if (!ids.insert(s.id).second) throw ParseError(source, line_no, "duplicate station id");
    stations.push_back(std::move(s));
  }
  std::sort(stations.begin(), stations.end(), [](const Station& a, const Station& b) { return a.id < b.id; });
  return stations;
}

std::vector<Station> load_stations(const std::filesystem::path& file, const RoadNetwork& net) {
  std::ifstream in(file);
  if (!in) throw ParseError(file.string(), 0, "cannot open file");
  return parse_stations(in, net, file.string());
}

StationId select_station(const Vehicle& vehicle, const std::vector<Station>& stations, Router& router) {
  if (stations.empty()) throw NoStations();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const Station* best_free = nullptr;
  const Station* best_any = nullptr;
  double d_free = kInf;
  double d_any = kInf;
  auto better = [](double d, const Station& s, double best_d, const Station* best) {
    return best == nullptr || d < best_d || (d == best_d && s.id < best->id);
  };
  for (const auto& s : stations) {
    const double d = router.distance(vehicle.node, s.node);
    if (better(d, s, d_any, best_any)) {
      best_any = &s;
      d_any = d;
    }
    // A free slot only counts if the vehicle can get there on its battery.
    if (s.has_free_slot() && d / 1000.0 <= vehicle.battery_km && better(d, s, d_free, best_free)) {
      best_free = &s;
      d_free = d;
    }
  }
  return best_free != nullptr ? best_free->id : best_any->id;
}

StationId select_station(const Vehicle& vehicle, const std::vector<Station>& stations, const RoadNetwork& net) {
  // Non-owning alias; the router never outlives this call.
  Router router(std::shared_ptr<const RoadNetwork>(std::shared_ptr<const RoadNetwork>{}, &net));
  return select_station(vehicle, stations, router);
}

void arrive_at_station(Vehicle& vehicle, Station& station, const VehicleSpec& spec, double now_s) {
  vehicle.station = station.id;
  if (station.has_free_slot() && station.queue.empty()) {
    station.occupants.insert(std::upper_bound(station.occupants.begin(), station.occupants.end(), vehicle.id),
                             vehicle.id);
    start_charge(vehicle, spec, station.kind, station.node, now_s);
  } else {
    vehicle.queued = true;
    station.queue.push_back(vehicle.id);
  }
}

void release_slot(Station& station, VehicleId vehicle) {
  auto it = std::lower_bound(station.occupants.begin(), station.occupants.end(), vehicle);
  if (it != station.occupants.end() && *it == vehicle) station.occupants.erase(it);
}

std::vector<VehicleId> admit_from_queue(Station& station, const VehicleLookup& lookup, const VehicleSpec& spec,
                                        double now_s) {
  std::vector<VehicleId> admitted;
  while (station.has_free_slot() && !station.queue.empty()) {
    const VehicleId id = station.queue.front();
    station.queue.pop_front();
    station.occupants.insert(std::upper_bound(station.occupants.begin(), station.occupants.end(), id), id);
    start_charge(lookup(id), spec, station.kind, station.node, now_s);
    admitted.push_back(id);
  }
  return admitted;
}

std::vector<VehicleId> night_charge_sweep(double clock_s, const std::vector<Vehicle>& fleet,
                                          const VehicleSpec& spec, const ChargingStrategy& strategy) {
  std::vector<VehicleId> out;
  if (!strategy.night_charging()) return out;
  const auto day = day_of(clock_s);
  const double t = clock_s - static_cast<double>(day) * 86400.0;
  if (t < strategy.night_start_s || t >= strategy.night_end_s) return out;
  for (const auto& v : fleet) {
    if (v.state != VehicleState::Idle) continue;
    if (v.night_charged_day && *v.night_charged_day == day) continue;
    if (v.battery_km < strategy.night_trigger_frac * spec.range_km) out.push_back(v.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace fleetsim
