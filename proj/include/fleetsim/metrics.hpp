#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fleetsim/demand.hpp"
#include "fleetsim/fleet.hpp"

namespace fleetsim {

enum class EntityKind : std::uint8_t { Vehicle, Order, Control };

/// State codes in trace records: values >= 0 are VehicleState or OrderState
/// ordinals; the negative ones mark life-cycle edges of the log itself.
namespace trace_state {
inline constexpr std::int8_t kNone = -1;     // entity did not exist before
inline constexpr std::int8_t kRemoved = -2;  // vehicle taken out of the fleet
inline constexpr std::int8_t kFinal = -3;    // end-of-run odometer flush
}  // namespace trace_state

struct TraceRecord {
  double t_s = 0.0;
  EntityKind entity = EntityKind::Vehicle;
  std::int64_t id = 0;
  std::int8_t from = trace_state::kNone;
  std::int8_t to = trace_state::kNone;
  /// Vehicles: km driven while in `from`.
  double leg_km = 0.0;

  bool operator==(const TraceRecord&) const = default;
};

/// Append-only log of every state transition; the only input of compute_metrics.
struct EventTrace {
  double tick_s = 5.0;
  std::vector<TraceRecord> records;
  /// Control payloads, indexed by the `id` of Control records.
  std::vector<std::string> controls;

  bool operator==(const EventTrace&) const = default;
};

std::string state_name(EntityKind entity, std::int8_t code);

/// `t_s,entity,from,to` with entities written as v<id>, o<id> or control.
void write_trace_csv(std::ostream& out, const EventTrace& trace);

using StateCounts = std::array<std::int64_t, kVehicleStateCount>;

struct WaitSample {
  double delivered_at_s = 0.0;
  double wait_s = 0.0;

  bool operator==(const WaitSample&) const = default;
};

struct MetricsReport {
  std::int64_t num_vehicles = 0;
  std::int64_t demand_count = 0;
  double avg_trip_time_min = 0.0;
  double pct_under_40min = 0.0;
  double avg_trips_per_vehicle = 0.0;
  std::int64_t total_charges = 0;
  double total_km = 0.0;
  double pct_km_pickup = 0.0;
  double pct_km_delivery = 0.0;
  double pct_km_recharge = 0.0;
  double avg_km_per_vehicle = 0.0;
  std::int64_t unserved_count = 0;

  std::int64_t delivered_count = 0;
  double end_time_s = 0.0;
  /// One sample per tick boundary, t = k * tick_s.
  std::vector<StateCounts> state_timeseries;
  /// One entry per delivered order, in delivery order.
  std::vector<WaitSample> wait_timeseries;

  bool operator==(const MetricsReport&) const = default;
};

MetricsReport compute_metrics(const EventTrace& trace);

/// All orders served and at least 95% of them under 40 minutes.
bool service_level_met(const MetricsReport& report);

/// Column names of the report CSV row, in order.
const std::vector<std::string>& report_columns();
std::vector<std::string> report_values(const MetricsReport& report);
void write_report_csv(std::ostream& out, const MetricsReport& report, bool header = true);
/// Structured report. The time series are included when `with_series`.
std::string report_json(const MetricsReport& report, bool with_series = true);

/// Fixed-format number used by every CSV writer so outputs compare bytewise.
std::string format_number(double value);

}  // namespace fleetsim
