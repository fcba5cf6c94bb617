// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fleetsim/engine.hpp"
#include "fleetsim/impact.hpp"
#include "fleetsim/metrics.hpp"
#include "fleetsim/sweep.hpp"
#include "support.hpp"

using namespace fleetsim;
using namespace fleetsim::testing;

namespace {

// Tolerances and budgets.
constexpr double kReductionTolPp = 0.05;
constexpr int kReductionRowsNeeded = 30;
constexpr double kLineWaitMin = 4.0;
constexpr double kLineWaitTolMin = 5.0 / 60.0;
constexpr double kKmTol = 1e-9;
constexpr double kPctSumTol = 0.1;
constexpr int kRandomGraphs = 50;
constexpr int kRandomGraphMaxNodes = 20;
constexpr int kFcStrictCellsNeeded = 7;
constexpr int kMonotoneSeedsNeeded = 9;
constexpr double kNightFrom_s = 2 * 3600.0;
constexpr double kNightTo_s = 5 * 3600.0;

constexpr double kBudget1_s = 1.0;
constexpr double kBudget2_s = 10.0;
constexpr double kBudget3_s = 1.0;
constexpr double kBudget4_s = 60.0;  // per strategy
constexpr double kBudget5_s = 15 * 60.0;
constexpr double kBudget6_s = 10 * 60.0;
constexpr double kBudget7_s = 2 * 60.0;
constexpr double kBudget8_s = 2 * 60.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, double budget_s, const std::function<Outcome()>& check) {
  const auto start = Clock::now();
  Outcome out;
  try {
    out = check();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double elapsed = seconds_since(start);
  if (elapsed >= budget_s) {
    out.pass = false;
    out.detail += " (over budget)";
  }
  if (!out.pass) ++failures;
  std::printf("[%s] %d %s: %s; %.2f s of %.0f s\n", out.pass ? "PASS" : "FAIL", id, title.c_str(),
              out.detail.c_str(), elapsed, budget_s);
  std::fflush(stdout);
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

Outcome reduction_rows() {
  const auto c = load_coefficients(std::string(FLEETSIM_LCA_DIR) + "/illustrative.txt");
  std::ifstream in(kFixtureDir + "/lca_rows.csv");
  std::string line;
  int rows = 0;
  int reproduced = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream cells(line);
    std::vector<std::string> f;
    std::string cell;
    while (std::getline(cells, cell, ',')) f.push_back(cell);
    if (f.size() != 9) return {false, "malformed fixture row: " + line};
    const double km = std::stod(f[4]);
    const double ice = reduction_vs_baseline(std::stod(f[5]), km, c.ice.g_per_km, c.ice.km);
    const double bev = reduction_vs_baseline(std::stod(f[7]), km, c.bev_renewable.g_per_km, c.bev_renewable.km);
    ++rows;
    if (std::abs(ice - std::stod(f[6])) <= kReductionTolPp && std::abs(bev - std::stod(f[8])) <= kReductionTolPp) {
      ++reproduced;
    }
  }
  const bool a = round2(reduction_vs_baseline(44.95, 6696, c.ice.g_per_km, c.ice.km)) == 81.58;
  const bool b = round2(reduction_vs_baseline(21.81, 7750, c.ice.g_per_km, c.ice.km)) == 89.66;
  const bool d = round2(reduction_vs_baseline(36.07, 6696, c.bev_renewable.g_per_km, c.bev_renewable.km)) == 48.34;
  std::ostringstream s;
  s << reproduced << "/" << rows << " rows within " << kReductionTolPp << " pp, worked examples "
    << (a && b && d ? "exact" : "off");
  return {rows == 36 && reproduced >= kReductionRowsNeeded && a && b && d, s.str()};
}

Outcome shortest_paths() {
  Rng rng(20240601);
  long pairs = 0;
  for (int g = 0; g < kRandomGraphs; ++g) {
    const int n = 2 + static_cast<int>(rng.index(kRandomGraphMaxNodes - 1));
    const auto net = random_graph(rng, n);
    const auto d = floyd_warshall(net);
    for (std::size_t i = 0; i < net.node_count(); ++i) {
      for (std::size_t j = 0; j < net.node_count(); ++j) {
        const double got = network_distance(net, net.nodes()[i].id, net.nodes()[j].id);
        if (got != d[i][j]) {
          return {false, "graph " + std::to_string(g) + " pair " + std::to_string(i) + "," + std::to_string(j) +
                             " differs"};
        }
        ++pairs;
      }
    }
  }
  return {true, std::to_string(kRandomGraphs) + " graphs, " + std::to_string(pairs) + " pairs exact"};
}

Outcome line_graph_run() {
  ScenarioConfig c;
  c.apply_scenario(ScenarioKind::ICE);
  c.fleet_size = 1;
  ScenarioInputs in;
  in.network = std::make_shared<const RoadNetwork>(line_graph(3, 1000));
  Station s;
  s.id = 1;
  s.node = 1;
  in.stations = {s};
  in.orders = {order(0, 0, 2, 3)};
  in.fleet = std::vector<Vehicle>{idle_vehicle(0, 1, c.spec.range_km)};
  const auto r = run(c, in).report;
  const double pickup_km = r.total_km * r.pct_km_pickup / 100.0;
  const double delivery_km = r.total_km * r.pct_km_delivery / 100.0;
  const double recharge_km = r.total_km * r.pct_km_recharge / 100.0;
  std::ostringstream out;
  out << "wait " << r.avg_trip_time_min << " min, km " << pickup_km << "/" << delivery_km << "/" << recharge_km;
  const bool ok = std::abs(r.avg_trip_time_min - kLineWaitMin) <= kLineWaitTolMin &&
                  std::abs(pickup_km - 1.0) <= kKmTol && std::abs(delivery_km - 1.0) <= kKmTol &&
                  std::abs(recharge_km) <= kKmTol && r.delivered_count == 1;
  return {ok, out.str()};
}

bool order_step_allowed(std::int8_t from, std::int8_t to) {
  const auto code = [](OrderState s) { return static_cast<std::int8_t>(s); };
  return (from == trace_state::kNone && to == code(OrderState::Waiting)) ||
         (from == code(OrderState::Waiting) && to == code(OrderState::Assigned)) ||
         (from == code(OrderState::Assigned) && to == code(OrderState::InTransit)) ||
         (from == code(OrderState::InTransit) && to == code(OrderState::Delivered));
}

Outcome desk_strategy(ScenarioKind kind) {
  auto c = desk_config();
  c.apply_scenario(kind);
  const auto inputs = load_inputs(c);
  Engine e(c, inputs);
  long battery_violations = 0;
  do {
    e.tick();
    for (const auto& v : e.vehicles()) {
      if (v.battery_km < 0.0 || v.battery_km > c.spec.range_km) ++battery_violations;
    }
  } while (!e.finished());
  e.finalize();

  long forbidden = 0;
  for (const auto& r : e.trace().records) {
    if (r.entity == EntityKind::Vehicle) {
      if (r.from >= 0 && r.to >= 0 &&
          !transition_allowed(static_cast<VehicleState>(r.from), static_cast<VehicleState>(r.to))) {
        ++forbidden;
      }
    } else if (r.entity == EntityKind::Order) {
      if (!order_step_allowed(r.from, r.to)) ++forbidden;
    }
  }
  const auto report = compute_metrics(e.trace());
  const double pct_sum = report.pct_km_pickup + report.pct_km_delivery + report.pct_km_recharge;
  const bool delivered = report.delivered_count == static_cast<std::int64_t>(inputs.orders.size()) &&
                         report.unserved_count == 0;
  std::ostringstream out;
  out << to_string(kind) << " forbidden " << forbidden << ", battery out of range " << battery_violations
      << ", km% sum " << pct_sum << ", delivered " << report.delivered_count << "/" << inputs.orders.size();
  return {forbidden == 0 && battery_violations == 0 && std::abs(pct_sum - 100.0) <= kPctSumTol && delivered,
          out.str()};
}

Outcome fc_beats_cc() {
  const auto base = desk_config();
  const auto inputs = load_inputs(base);
  const auto table = strategy_fleet_table(base, inputs, {35, 50, 65}, {8, 11, 14}, 1, 120, 1, 1);
  int le = 0;
  int strict = 0;
  std::ostringstream cells;
  for (const auto& row : table) {
    const auto& cc = row.fleets[0];
    const auto& fc = row.fleets[3];
    cells << " " << row.battery_km << "/" << row.speed_kmh << ":";
    cells << (cc ? std::to_string(*cc) : "-") << "/" << (fc ? std::to_string(*fc) : "-");
    if (!cc || !fc) continue;
    if (*fc <= *cc) ++le;
    if (*fc < *cc) ++strict;
  }
  std::ostringstream out;
  out << "FC<=CC in " << le << "/9, FC<CC in " << strict << "/9 (CC/FC" << cells.str() << ")";
  return {table.size() == 9 && le == 9 && strict >= kFcStrictCellsNeeded, out.str()};
}

Outcome wait_vs_fleet() {
  auto c = desk_config();
  const auto inputs = load_inputs(c);
  int monotone = 0;
  std::ostringstream bad;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    c.seed = seed;
    double last = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (const std::size_t fleet : {10u, 20u, 40u, 80u}) {
      c.fleet_size = fleet;
      const double wait = run(c, inputs).report.avg_trip_time_min;
      if (wait > last) ok = false;
      last = wait;
    }
    if (ok) {
      ++monotone;
    } else {
      bad << " " << seed;
    }
  }
  std::string detail = std::to_string(monotone) + "/10 seeds non-increasing";
  if (!bad.str().empty()) detail += ", broken at seeds" + bad.str();
  return {monotone >= kMonotoneSeedsNeeded, detail};
}

struct RunBytes {
  std::string trace;
  std::string csv;
  std::string json;
  bool operator==(const RunBytes&) const = default;
};

RunBytes run_bytes(const ScenarioConfig& c, const ScenarioInputs& inputs) {
  const auto r = run(c, inputs);
  std::ostringstream trace;
  std::ostringstream csv;
  write_trace_csv(trace, r.trace);
  write_report_csv(csv, r.report);
  return {trace.str(), csv.str(), report_json(r.report)};
}

Outcome determinism() {
  int same = 0;
  int total = 0;
  for (const auto kind : {ScenarioKind::CC, ScenarioKind::FC}) {
    auto c = desk_config();
    c.apply_scenario(kind);
    const auto inputs = load_inputs(c);
    const auto a = run_bytes(c, inputs);
    const auto b = run_bytes(c, inputs);
    c.advance_threads = 4;
    const auto p = run_bytes(c, inputs);
    same += (a == b) + (a == p);
    total += 2;
  }
  auto base = desk_config();
  base.fleet_size = 30;
  const auto cells = battery_speed_grid(base, ScenarioKind::NC, {35, 65}, {8, 14});
  std::ostringstream serial;
  std::ostringstream parallel;
  write_grid_csv(serial, run_grid(cells, 1));
  write_grid_csv(parallel, run_grid(cells, 3));
  same += serial.str() == parallel.str();
  ++total;
  return {same == total, std::to_string(same) + "/" + std::to_string(total) +
                             " comparisons byte-identical (repeat, 4 advance threads, 3 grid workers)"};
}

std::int64_t night_peak_charging(const MetricsReport& r, double tick_s) {
  std::int64_t peak = 0;
  for (std::size_t k = 0; k < r.state_timeseries.size(); ++k) {
    const double tod = std::fmod(static_cast<double>(k) * tick_s, 86400.0);
    if (tod < kNightFrom_s || tod >= kNightTo_s) continue;
    peak = std::max(peak, r.state_timeseries[k][static_cast<std::size_t>(VehicleState::Charging)]);
  }
  return peak;
}

Outcome night_peak() {
  auto c = desk_config();
  const auto inputs = load_inputs(c);
  c.apply_scenario(ScenarioKind::CC);
  const auto cc = night_peak_charging(run(c, inputs).report, c.tick_s);
  c.apply_scenario(ScenarioKind::NC);
  const auto nc = night_peak_charging(run(c, inputs).report, c.tick_s);
  return {nc >= cc, "peak charging 02:00-05:00 NC " + std::to_string(nc) + ", CC " + std::to_string(cc)};
}

MetricsReport level(double pct, std::int64_t unserved) {
  MetricsReport r;
  r.pct_under_40min = pct;
  r.unserved_count = unserved;
  return r;
}

Outcome truth_table() {
  struct Row {
    double pct;
    std::int64_t unserved;
    bool expected;
  };
  const Row rows[] = {{94.99, 0, false}, {95.00, 0, true}, {99.82, 0, true},
                      {94.99, 1, false}, {95.00, 1, false}, {99.82, 1, false}};
  int right = 0;
  for (const auto& row : rows) right += service_level_met(level(row.pct, row.unserved)) == row.expected;
  return {right == 6, std::to_string(right) + "/6 rows"};
}

}  // namespace

int main() {
  report(1, "reduction recompute", kBudget1_s, reduction_rows);
  report(2, "shortest paths vs Floyd-Warshall", kBudget2_s, shortest_paths);
  report(3, "line graph single vehicle", kBudget3_s, line_graph_run);
  for (const auto kind : {ScenarioKind::CC, ScenarioKind::NC, ScenarioKind::SD, ScenarioKind::FC}) {
    report(4, std::string("desk invariants ") + to_string(kind), kBudget4_s, [kind] { return desk_strategy(kind); });
  }
  report(5, "min fleet FC vs CC", kBudget5_s, fc_beats_cc);
  report(6, "mean wait over fleet sizes", kBudget6_s, wait_vs_fleet);
  report(7, "determinism", kBudget7_s, determinism);
  report(8, "night charging peak", kBudget8_s, night_peak);
  report(9, "service level truth table", 1.0, truth_table);
  std::printf("%s\n", failures == 0 ? "all criteria pass" : (std::to_string(failures) + " failing").c_str());
  return failures == 0 ? 0 : 1;
}
