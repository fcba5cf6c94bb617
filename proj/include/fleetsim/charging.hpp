#pragma once

#include <deque>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "fleetsim/fleet.hpp"
#include "fleetsim/network.hpp"

namespace fleetsim {

struct Station {
  StationId id = 0;
  NodeId node = 0;
  int capacity = 1;
  /// Kept sorted.
  std::vector<VehicleId> occupants;
  std::deque<VehicleId> queue;
  ChargeKind kind = ChargeKind::Plug;

  bool has_free_slot() const { return static_cast<int>(occupants.size()) < capacity; }
};

enum class StrategyKind { CC, NC, SD, FC };

const char* to_string(StrategyKind k);
StrategyKind strategy_from_string(const std::string& s);

struct ChargingStrategy {
  StrategyKind kind = StrategyKind::CC;
  double night_start_s = 2 * 3600.0;
  double night_end_s = 5 * 3600.0;
  double night_trigger_frac = 0.90;

  bool night_charging() const { return kind == StrategyKind::NC || kind == StrategyKind::SD; }
  ChargeKind station_kind() const { return kind == StrategyKind::FC ? ChargeKind::Swap : ChargeKind::Plug; }
  /// Throws InvalidConfig.
  void validate() const;
};

/// `S,<id>,<node>,<capacity>,<Plug|Swap>` records, `#` comments.
std::vector<Station> parse_stations(std::istream& in, const RoadNetwork& net,
                                    const std::string& source = "<stations>");
std::vector<Station> load_stations(const std::filesystem::path& file, const RoadNetwork& net);

/// Nearest station with a free slot (and within battery reach) by network
/// distance; otherwise nearest overall. Ties by smallest station id.
/// Throws NoStations.
StationId select_station(const Vehicle& vehicle, const std::vector<Station>& stations, Router& router);
StationId select_station(const Vehicle& vehicle, const std::vector<Station>& stations,
                         const RoadNetwork& net);

/// A ToCharge vehicle standing at the station occupies a free slot (and
/// starts charging) or joins the FIFO queue.
void arrive_at_station(Vehicle& vehicle, Station& station, const VehicleSpec& spec, double now_s);

/// Frees the slot held by `vehicle`.
void release_slot(Station& station, VehicleId vehicle);

using VehicleLookup = std::function<Vehicle&(VehicleId)>;

/// Moves queue heads into free slots and starts their charge. Returns the
/// admitted vehicle ids in admission order.
std::vector<VehicleId> admit_from_queue(Station& station, const VehicleLookup& lookup,
                                        const VehicleSpec& spec, double now_s);

/// Idle vehicles below the night trigger that have not been night-charged on
/// the current day, when the clock is inside the night window. Ids ascending.
std::vector<VehicleId> night_charge_sweep(double clock_s, const std::vector<Vehicle>& fleet,
                                          const VehicleSpec& spec, const ChargingStrategy& strategy);

inline std::int64_t day_of(double clock_s) { return static_cast<std::int64_t>(clock_s / 86400.0); }

}  // namespace fleetsim
