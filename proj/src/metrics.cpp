#include "fleetsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include <json.hpp>

namespace fleetsim {

namespace {

constexpr double kServiceLimitS = 40 * 60.0;

std::string entity_label(const TraceRecord& r) {
  switch (r.entity) {
    case EntityKind::Vehicle: return "v" + std::to_string(r.id);
    case EntityKind::Order: return "o" + std::to_string(r.id);
    case EntityKind::Control: return "control";
  }
  return "?";
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double pct(double part, double whole) { return whole > 0.0 ? 100.0 * part / whole : 0.0; }

}  // namespace

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::string state_name(EntityKind entity, std::int8_t code) {
  switch (code) {
    case trace_state::kNone: return "None";
    case trace_state::kRemoved: return "Removed";
    case trace_state::kFinal: return "Final";
    default: break;
  }
  if (entity == EntityKind::Vehicle) return to_string(static_cast<VehicleState>(code));
  if (entity == EntityKind::Order) return to_string(static_cast<OrderState>(code));
  return "";
}

void write_trace_csv(std::ostream& out, const EventTrace& trace) {
  out << "t_s,entity,from,to\n";
  for (const auto& r : trace.records) {
    out << format_number(r.t_s) << ',' << entity_label(r) << ',';
    if (r.entity == EntityKind::Control) {
      out << ',' << csv_quote(trace.controls.at(static_cast<std::size_t>(r.id))) << '\n';
    } else {
      out << state_name(r.entity, r.from) << ',' << state_name(r.entity, r.to) << '\n';
    }
  }
}

MetricsReport compute_metrics(const EventTrace& trace) {
  MetricsReport m;
  std::map<std::int64_t, double> placed_at;
  StateCounts counts{};
  double km[kVehicleStateCount] = {};
  std::int64_t trips = 0;
  std::int64_t under_limit = 0;
  double wait_sum = 0.0;
  std::int64_t next_sample = 0;

  const auto tick_index = [&](double t) { return static_cast<std::int64_t>(std::llround(t / trace.tick_s)); };
  auto flush_samples_before = [&](std::int64_t k) {
    for (; next_sample < k; ++next_sample) m.state_timeseries.push_back(counts);
  };

  for (const auto& r : trace.records) {
    m.end_time_s = std::max(m.end_time_s, r.t_s);
    if (r.entity == EntityKind::Control) continue;
    if (r.entity == EntityKind::Order) {
      const auto to = static_cast<OrderState>(r.to);
      if (r.from == trace_state::kNone) {
        placed_at[r.id] = r.t_s;
      } else if (to == OrderState::Delivered) {
        const double wait = r.t_s - placed_at.at(r.id);
        ++m.delivered_count;
        wait_sum += wait;
        if (wait < kServiceLimitS) ++under_limit;
        m.wait_timeseries.push_back({r.t_s, wait});
      } else if (to == OrderState::Dropped) {
        ++m.unserved_count;
      }
      continue;
    }

    flush_samples_before(tick_index(r.t_s));
    if (r.from >= 0) km[r.from] += r.leg_km;
    if (r.to == trace_state::kFinal) continue;
    if (r.from >= 0) --counts[static_cast<std::size_t>(r.from)];
    if (r.to >= 0) ++counts[static_cast<std::size_t>(r.to)];
    if (r.from < 0 || r.to < 0) continue;
    const auto from = static_cast<VehicleState>(r.from);
    const auto to = static_cast<VehicleState>(r.to);
    if (from == VehicleState::ToDelivery) ++trips;
    if (from == VehicleState::ToCharge && to == VehicleState::Charging) ++m.total_charges;
  }
  flush_samples_before(tick_index(m.end_time_s) + 1);

  std::int64_t created = 0;
  std::int64_t removed = 0;
  for (const auto& r : trace.records) {
    if (r.entity != EntityKind::Vehicle) continue;
    if (r.from == trace_state::kNone) ++created;
    if (r.to == trace_state::kRemoved) ++removed;
  }
  m.num_vehicles = created - removed;
  m.demand_count = m.delivered_count + m.unserved_count;
  m.avg_trip_time_min = m.delivered_count ? wait_sum / static_cast<double>(m.delivered_count) / 60.0 : 0.0;
  m.pct_under_40min = m.delivered_count ? pct(static_cast<double>(under_limit), static_cast<double>(m.delivered_count))
                                        : 100.0;
  const double pickup = km[static_cast<int>(VehicleState::ToPickup)];
  const double delivery = km[static_cast<int>(VehicleState::ToDelivery)];
  const double recharge = km[static_cast<int>(VehicleState::ToCharge)];
  m.total_km = pickup + delivery + recharge;
  m.pct_km_pickup = pct(pickup, m.total_km);
  m.pct_km_delivery = pct(delivery, m.total_km);
  m.pct_km_recharge = pct(recharge, m.total_km);
  if (m.num_vehicles > 0) {
    m.avg_trips_per_vehicle = static_cast<double>(trips) / static_cast<double>(m.num_vehicles);
    m.avg_km_per_vehicle = m.total_km / static_cast<double>(m.num_vehicles);
  }
  return m;
}

bool service_level_met(const MetricsReport& report) {
  return report.unserved_count == 0 && report.pct_under_40min >= 95.0;
}

const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> columns = {
      "num_vehicles",    "demand_count",    "avg_trip_time_min", "pct_under_40min",
      "avg_trips_per_vehicle", "total_charges", "total_km",   "pct_km_pickup",
      "pct_km_delivery", "pct_km_recharge", "avg_km_per_vehicle", "unserved_count"};
  return columns;
}

std::vector<std::string> report_values(const MetricsReport& m) {
  return {std::to_string(m.num_vehicles),       std::to_string(m.demand_count),
          format_number(m.avg_trip_time_min),   format_number(m.pct_under_40min),
          format_number(m.avg_trips_per_vehicle), std::to_string(m.total_charges),
          format_number(m.total_km),            format_number(m.pct_km_pickup),
          format_number(m.pct_km_delivery),     format_number(m.pct_km_recharge),
          format_number(m.avg_km_per_vehicle),  std::to_string(m.unserved_count)};
}

void write_report_csv(std::ostream& out, const MetricsReport& report, bool header) {
  auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  };
  if (header) write_row(report_columns());
  write_row(report_values(report));
}

std::string report_json(const MetricsReport& m, bool with_series) {
  nlohmann::ordered_json j;
  j["num_vehicles"] = m.num_vehicles;
  j["demand_count"] = m.demand_count;
  j["avg_trip_time_min"] = m.avg_trip_time_min;
  j["pct_under_40min"] = m.pct_under_40min;
  j["avg_trips_per_vehicle"] = m.avg_trips_per_vehicle;
  j["total_charges"] = m.total_charges;
  j["total_km"] = m.total_km;
  j["pct_km_pickup"] = m.pct_km_pickup;
  j["pct_km_delivery"] = m.pct_km_delivery;
  j["pct_km_recharge"] = m.pct_km_recharge;
  j["avg_km_per_vehicle"] = m.avg_km_per_vehicle;
  j["unserved_count"] = m.unserved_count;
  j["delivered_count"] = m.delivered_count;
  j["end_time_s"] = m.end_time_s;
  j["service_level_met"] = service_level_met(m);
  if (with_series) {
    auto states = nlohmann::ordered_json::array();
    for (const auto& c : m.state_timeseries) states.push_back(c);
    j["state_timeseries"] = std::move(states);
    auto waits = nlohmann::ordered_json::array();
    for (const auto& w : m.wait_timeseries) waits.push_back({w.delivered_at_s, w.wait_s});
    j["wait_timeseries"] = std::move(waits);
  }
  return j.dump(2);
}

}  // namespace fleetsim
