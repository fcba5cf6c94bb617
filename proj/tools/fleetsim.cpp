// Command-line front end: single runs, min-fleet search, grids, demand
// synthesis and the live server.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "fleetsim/demand.hpp"
#include "fleetsim/engine.hpp"
#include "fleetsim/errors.hpp"
#include "fleetsim/impact.hpp"
#include "fleetsim/scenario.hpp"
#include "fleetsim/server/server.hpp"
#include "fleetsim/sweep.hpp"

namespace {

using namespace fleetsim;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNotFound = 2;

struct Overrides {
  std::string config;
  std::string scenario;
  std::string strategy;
  std::optional<std::size_t> fleet;
  std::optional<double> battery_km;
  std::optional<double> speed_kmh;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> set;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "Scenario config file")->required()->check(CLI::ExistingFile);
    app->add_option("--scenario", scenario, "ICE, BEV, CC, NC, SD or FC");
    app->add_option("--strategy", strategy, "Charging strategy for SLAV runs: CC, NC, SD or FC");
    app->add_option("--fleet", fleet, "Fleet size");
    app->add_option("--battery-km", battery_km, "Battery range in km");
    app->add_option("--speed-kmh", speed_kmh, "Vehicle speed in km/h");
    app->add_option("--seed", seed, "Fleet placement seed");
    app->add_option("--set", set, "Extra key=value config overrides");
  }

  ScenarioConfig resolve() const {
    ScenarioConfig c = load_config(config);
    if (!scenario.empty()) c.apply_scenario(scenario_from_string(scenario));
    if (!strategy.empty()) c.apply_scenario(scenario_from_string(strategy));
    if (fleet) c.fleet_size = *fleet;
    if (battery_km) c.spec.range_km = *battery_km;
    if (speed_kmh) c.spec.speed_kmh = *speed_kmh;
    if (seed) c.seed = *seed;
    for (const auto& kv : set) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw InvalidConfig("--set expects key=value, got '" + kv + "'");
      set_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    c.validate();
    return c;
  }
};

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

// Writes to `path`, or stdout when empty or "-".
template <typename F>
void emit(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Food-delivery fleet simulator"};
  app.require_subcommand(1);

  Overrides sim_opts;
  std::string sim_out;
  std::string sim_json;
  std::string sim_trace;
  auto* simulate = app.add_subcommand("simulate", "Run one Batch scenario and print the report");
  sim_opts.attach(simulate);
  simulate->add_option("--out", sim_out, "Report CSV (default stdout)");
  simulate->add_option("--json", sim_json, "Report JSON with time series");
  simulate->add_option("--trace", sim_trace, "Event trace CSV");

  Overrides mf_opts;
  std::size_t mf_min = 10;
  std::size_t mf_max = 300;
  std::size_t mf_step = 10;
  std::string mf_out;
  auto* minfleet = app.add_subcommand("minfleet", "Smallest fleet meeting the service criterion");
  mf_opts.attach(minfleet);
  minfleet->add_option("--min", mf_min, "Smallest fleet to try");
  minfleet->add_option("--max", mf_max, "Largest fleet to try");
  minfleet->add_option("--step", mf_step, "Fleet increment");
  minfleet->add_option("--out", mf_out, "Probe CSV (default stdout)");

  Overrides grid_opts;
  std::string grid_batteries = "35,50,65";
  std::string grid_speeds = "8,11,14";
  std::vector<std::string> grid_strategies{"CC"};
  std::size_t grid_workers = 1;
  std::string grid_out;
  bool grid_fleet_table = false;
  std::size_t gt_min = 10;
  std::size_t gt_max = 300;
  std::size_t gt_step = 10;
  auto* grid = app.add_subcommand("grid", "Battery x speed grid, one row per run");
  grid_opts.attach(grid);
  grid->add_option("--batteries", grid_batteries, "Comma-separated battery ranges (km)");
  grid->add_option("--speeds", grid_speeds, "Comma-separated speeds (km/h)");
  grid->add_option("--strategies", grid_strategies, "Strategies to run")->delimiter(',');
  grid->add_option("--workers", grid_workers, "Parallel runs");
  grid->add_option("--out", grid_out, "Result CSV (default stdout)");
  grid->add_flag("--fleet-table", grid_fleet_table, "Min fleet per strategy and cell, with deltas vs CC");
  grid->add_option("--min", gt_min, "Fleet table: smallest fleet");
  grid->add_option("--max", gt_max, "Fleet table: largest fleet");
  grid->add_option("--step", gt_step, "Fleet table: increment");

  std::string synth_profile;
  std::uint64_t synth_seed = 1;
  std::optional<std::size_t> synth_total;
  std::string synth_network;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate an orders CSV from a demand profile");
  synth->add_option("--profile", synth_profile, "Profile file")->required()->check(CLI::ExistingFile);
  synth->add_option("--network", synth_network, "Network file to check node ids against")->check(CLI::ExistingFile);
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--total", synth_total, "Override the profile's order count");
  synth->add_option("--out", synth_out, "Orders CSV (default stdout)");

  std::string serve_config;
  int serve_port = 8080;
  auto* serve = app.add_subcommand("serve", "Host a live session (HTTP + WebSocket)");
  serve->add_option("--config", serve_config, "Scenario config file")->required()->check(CLI::ExistingFile);
  serve->add_option("--port", serve_port, "TCP port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; usage errors share the generic error code.
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }

  try {
    if (simulate->parsed()) {
      const auto config = sim_opts.resolve();
      const auto result = run(config);
      emit(sim_out, [&](std::ostream& o) { write_report_csv(o, result.report); });
      if (!sim_json.empty()) emit(sim_json, [&](std::ostream& o) { o << report_json(result.report) << '\n'; });
      if (!sim_trace.empty()) emit(sim_trace, [&](std::ostream& o) { write_trace_csv(o, result.trace); });
      return kExitOk;
    }
    if (minfleet->parsed()) {
      const auto config = mf_opts.resolve();
      const auto inputs = load_inputs(config);
      const auto result = find_min_fleet(config, inputs, mf_min, mf_max, mf_step);
      emit(mf_out, [&](std::ostream& o) {
        o << "fleet_size,met,pct_under_40min,note\n";
        for (const auto& p : result.probes) {
          o << p.fleet_size << ',' << (p.met ? 1 : 0) << ',' << format_number(p.pct_under_40min) << ',' << p.note
            << '\n';
        }
      });
      if (!result.found()) {
        std::cerr << "NotFound: no fleet in [" << mf_min << ", " << mf_max << "] meets the criterion; best "
                  << format_number(result.best_pct_under_40min) << "% at " << result.best_fleet << " vehicles\n";
        return kExitNotFound;
      }
      std::cerr << "min fleet: " << *result.fleet_size << '\n';
      return kExitOk;
    }
    if (grid->parsed()) {
      const auto base = grid_opts.resolve();
      const auto batteries = parse_list(grid_batteries);
      const auto speeds = parse_list(grid_speeds);
      if (grid_fleet_table) {
        const auto inputs = load_inputs(base);
        const auto rows =
            strategy_fleet_table(base, inputs, batteries, speeds, gt_min, gt_max, gt_step, grid_workers);
        emit(grid_out, [&](std::ostream& o) { write_strategy_fleet_csv(o, rows); });
        return kExitOk;
      }
      std::vector<ScenarioConfig> configs;
      for (const auto& s : grid_strategies) {
        auto cells = battery_speed_grid(base, scenario_from_string(s), batteries, speeds);
        configs.insert(configs.end(), cells.begin(), cells.end());
      }
      std::optional<EmissionCoefficients> coefficients;
      if (!base.coefficients_file.empty()) coefficients = load_coefficients(base.coefficients_file);
      const auto rows = run_grid(configs, grid_workers, coefficients);
      emit(grid_out, [&](std::ostream& o) { write_grid_csv(o, rows); });
      return kExitOk;
    }
    if (synth->parsed()) {
      auto profile = load_profile(synth_profile);
      if (synth_total) profile.total_orders = *synth_total;
      if (!synth_network.empty()) check_profile_nodes(profile, load_network(synth_network));
      const auto orders = generate_synthetic(profile, synth_seed);
      emit(synth_out, [&](std::ostream& o) { write_orders_csv(o, orders); });
      return kExitOk;
    }
    if (serve->parsed()) {
      auto config = load_config(serve_config);
      config.mode = RunMode::Live;
      return server::serve(config, serve_port);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitOk;
}
