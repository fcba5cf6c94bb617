#include "fleetsim/sweep.hpp"

#include <atomic>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "fleetsim/errors.hpp"

namespace fleetsim {

namespace {

constexpr double kServiceLimitS = 40 * 60.0;

// Calls fn(i) for i in [0, n) on up to `workers` threads; the first
// exception (by index) is rethrown after all threads finish.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double pct_on_time(std::size_t total, std::size_t late) {
  return total ? 100.0 * static_cast<double>(total - late) / static_cast<double>(total) : 100.0;
}

std::string cell(const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : ""; }

}  // namespace

FleetProbe probe_service_level(const ScenarioConfig& config, const ScenarioInputs& inputs) {
  FleetProbe probe;
  probe.fleet_size = config.fleet_size;
  Engine engine(config, inputs);
  const auto& orders = engine.orders();
  const std::size_t total = orders.size();
  std::size_t aged = 0;
  std::size_t late = 0;
  try {
    do {
      engine.tick();
      // Orders are sorted by placement; once 40 min have passed, lateness is settled.
      while (aged < total && engine.clock_s() - orders[aged].placed_at_s >= kServiceLimitS) {
        const auto& o = orders[aged];
        if (!o.delivered_at_s || *o.delivered_at_s - o.placed_at_s >= kServiceLimitS) ++late;
        ++aged;
      }
      if (pct_on_time(total, late) < 95.0) {
        probe.pct_under_40min = pct_on_time(total, late);
        probe.note = "stopped: more than 5% of orders late";
        return probe;
      }
    } while (!engine.finished());
  } catch (const Stalled& e) {
    probe.pct_under_40min = pct_on_time(total, late);
    probe.note = std::string("stalled: ") + e.what();
    return probe;
  }
  engine.finalize();
  const auto report = compute_metrics(engine.trace());
  probe.pct_under_40min = report.pct_under_40min;
  probe.met = service_level_met(report);
  return probe;
}

MinFleetResult find_min_fleet(const ScenarioConfig& base, const ScenarioInputs& inputs, std::size_t fleet_min,
                              std::size_t fleet_max, std::size_t step) {
  if (fleet_min < 1 || fleet_min > fleet_max) throw InvalidConfig("need 1 <= fleet_min <= fleet_max");
  if (step < 1) throw InvalidConfig("step must be >= 1");
  MinFleetResult result;
  for (std::size_t n = fleet_min; n <= fleet_max; n += step) {
    ScenarioConfig config = base;
    config.fleet_size = n;
    auto probe = probe_service_level(config, inputs);
    if (result.probes.empty() || probe.pct_under_40min > result.best_pct_under_40min) {
      result.best_pct_under_40min = probe.pct_under_40min;
      result.best_fleet = n;
    }
    result.probes.push_back(probe);
    if (probe.met) {
      result.fleet_size = n;
      break;
    }
  }
  return result;
}

std::vector<GridRow> run_grid(const std::vector<ScenarioConfig>& configs, std::size_t workers,
                              const std::optional<EmissionCoefficients>& coefficients) {
  // Inputs are loaded once per distinct source so paired rows share demand.
  using Key = std::tuple<std::string, std::string, std::string, std::string, std::uint64_t, std::size_t, bool>;
  std::map<Key, std::shared_ptr<const ScenarioInputs>> cache;
  std::vector<std::shared_ptr<const ScenarioInputs>> inputs(configs.size());
  std::vector<std::string> load_errors(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto& c = configs[i];
    const Key key{c.network_file.string(), c.stations_file.string(), c.orders_file.string(),
                  c.profile_file.string(), c.demand_seed,           c.total_orders.value_or(0),
                  c.total_orders.has_value()};
    auto it = cache.find(key);
    if (it == cache.end()) {
      try {
        it = cache.emplace(key, std::make_shared<const ScenarioInputs>(load_inputs(c))).first;
      } catch (const std::exception& e) {
        load_errors[i] = e.what();
        continue;
      }
    }
    inputs[i] = it->second;
  }

  std::vector<GridRow> rows(configs.size());
  parallel_for(configs.size(), workers, [&](std::size_t i) {
    GridRow& row = rows[i];
    row.config = configs[i];
    if (!inputs[i]) {
      row.error = load_errors[i];
      return;
    }
    try {
      auto result = run(configs[i], *inputs[i]);
      if (coefficients && configs[i].spec.vehicle_class == VehicleClass::SLAV && result.report.total_km > 0.0) {
        row.impact = assess(*coefficients, configs[i].spec, static_cast<double>(result.report.num_vehicles),
                            result.report.total_km);
      }
      row.report = std::move(result.report);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return rows;
}

void write_grid_csv(std::ostream& out, const std::vector<GridRow>& rows) {
  out << "scenario,fleet_size,range_km,speed_kmh";
  for (const auto& c : report_columns()) out << ',' << c;
  out << ",gco2_per_km,red_vs_ice_pct,red_vs_bev_renewable_pct,error\n";
  for (const auto& row : rows) {
    out << to_string(row.config.scenario) << ',' << row.config.fleet_size << ','
        << format_number(row.config.spec.range_km) << ',' << format_number(row.config.spec.speed_kmh);
    if (row.report) {
      for (const auto& v : report_values(*row.report)) out << ',' << v;
    } else {
      for (std::size_t i = 0; i < report_columns().size(); ++i) out << ',';
    }
    if (row.impact) {
      out << ',' << format_number(row.impact->gco2_per_km) << ',' << format_number(row.impact->red_vs_ice_pct) << ','
          << format_number(row.impact->red_vs_bev_renewable_pct);
    } else {
      out << ",,,";
    }
    std::string error = row.error;
    for (auto& ch : error) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    out << ',' << error << '\n';
  }
}

std::vector<ScenarioConfig> battery_speed_grid(const ScenarioConfig& base, ScenarioKind scenario,
                                               const std::vector<double>& batteries_km,
                                               const std::vector<double>& speeds_kmh) {
  std::vector<ScenarioConfig> out;
  for (const double b : batteries_km) {
    for (const double s : speeds_kmh) {
      ScenarioConfig c = base;
      c.apply_scenario(scenario);
      c.spec.range_km = b;
      c.spec.speed_kmh = s;
      out.push_back(std::move(c));
    }
  }
  return out;
}

double fleet_delta_pct(std::size_t fleet, std::size_t reference) {
  if (reference == 0) throw NonPositiveInput("reference fleet must be positive");
  return 100.0 * (static_cast<double>(fleet) - static_cast<double>(reference)) / static_cast<double>(reference);
}

std::vector<StrategyFleetRow> strategy_fleet_table(const ScenarioConfig& base, const ScenarioInputs& inputs,
                                                   const std::vector<double>& batteries_km,
                                                   const std::vector<double>& speeds_kmh, std::size_t fleet_min,
                                                   std::size_t fleet_max, std::size_t step, std::size_t workers) {
  const ScenarioKind strategies[] = {ScenarioKind::CC, ScenarioKind::NC, ScenarioKind::SD, ScenarioKind::FC};
  struct Job {
    std::size_t row;
    std::size_t strategy;
    ScenarioConfig config;
  };
  std::vector<StrategyFleetRow> rows;
  std::vector<Job> jobs;
  for (const double b : batteries_km) {
    for (const double s : speeds_kmh) {
      StrategyFleetRow row;
      row.battery_km = b;
      row.speed_kmh = s;
      row.fleets.resize(4);
      for (std::size_t k = 0; k < 4; ++k) {
        ScenarioConfig c = base;
        c.apply_scenario(strategies[k]);
        c.spec.range_km = b;
        c.spec.speed_kmh = s;
        jobs.push_back({rows.size(), k, std::move(c)});
      }
      rows.push_back(std::move(row));
    }
  }
  std::mutex m;
  parallel_for(jobs.size(), workers, [&](std::size_t j) {
    const auto result = find_min_fleet(jobs[j].config, inputs, fleet_min, fleet_max, step);
    std::lock_guard lock(m);
    rows[jobs[j].row].fleets[jobs[j].strategy] = result.fleet_size;
  });
  for (auto& row : rows) {
    for (std::size_t k = 1; k < 4; ++k) {
      if (row.fleets[0] && row.fleets[k]) {
        row.delta_vs_cc_pct.emplace_back(fleet_delta_pct(*row.fleets[k], *row.fleets[0]));
      } else {
        row.delta_vs_cc_pct.emplace_back(std::nullopt);
      }
    }
  }
  return rows;
}

void write_strategy_fleet_csv(std::ostream& out, const std::vector<StrategyFleetRow>& rows) {
  out << "range_km,speed_kmh,fleet_cc,fleet_nc,delta_nc_pct,fleet_sd,delta_sd_pct,fleet_fc,delta_fc_pct\n";
  for (const auto& r : rows) {
    out << format_number(r.battery_km) << ',' << format_number(r.speed_kmh) << ',' << cell(r.fleets[0]);
    for (std::size_t k = 1; k < 4; ++k) {
      const auto& d = r.delta_vs_cc_pct[k - 1];
      out << ',' << cell(r.fleets[k]) << ',' << (d ? format_number(*d) : "");
    }
    out << '\n';
  }
}

}  // namespace fleetsim
