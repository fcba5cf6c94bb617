#include <gtest/gtest.h>

#include <set>

#include "fleetsim/errors.hpp"
#include "fleetsim/server/session.hpp"
#include "support.hpp"

using namespace fleetsim;
using namespace fleetsim::server;
using namespace fleetsim::testing;

namespace {

constexpr ControlLimits kSmallBoard{1, 300, 6.0, 20.0};

ScenarioConfig live_desk(std::size_t fleet = 60) {
  auto c = desk_config();
  c.fleet_size = fleet;
  return c;
}

LiveSession desk_session(std::size_t fleet = 60, ControlLimits limits = {}) {
  const auto c = live_desk(fleet);
  return LiveSession(c, load_inputs(c), load_coefficients(std::string(FLEETSIM_LCA_DIR) + "/illustrative.txt"),
                     limits);
}

json control(const std::string& type, json value = nullptr) {
  json m = {{"type", type}};
  if (!value.is_null()) m["value"] = std::move(value);
  return m;
}

bool same_kpi(const LiveSession& s) {
  const auto trace = s.trace();
  const auto live = s.config_document()["effective_config"];
  const auto replayed = KpiAccumulator::replay(trace, trace.records.size(), s.clock_s(), live["window_s"],
                                               live["window_sample_s"]);
  return to_json(replayed) == to_json(s.kpi());
}

}  // namespace

TEST(Kpi, Validation) {
  EXPECT_THROW(KpiAccumulator(0, 60), InvalidConfig);
  EXPECT_THROW(KpiAccumulator(3600, 0), InvalidConfig);
}

TEST(Kpi, SamplesAndReset) {
  KpiAccumulator k(600, 60);
  k.consume({0, EntityKind::Vehicle, 0, trace_state::kNone, 0, 0});
  k.consume({0, EntityKind::Order, 1, trace_state::kNone, 0, 0});
  k.consume({90, EntityKind::Order, 1, 2, static_cast<std::int8_t>(OrderState::Delivered), 0});
  k.advance_to(120);
  ASSERT_EQ(k.wait_window().size(), 3u);
  EXPECT_FALSE(k.wait_window()[1].avg_wait_min.has_value());
  EXPECT_DOUBLE_EQ(*k.wait_window()[2].avg_wait_min, 1.5);
  EXPECT_EQ(k.state_window()[2].counts[0], 1);
  k.consume({130, EntityKind::Order, 2, trace_state::kNone, 0, 0});
  k.consume({170, EntityKind::Order, 2, 0, static_cast<std::int8_t>(OrderState::Dropped), 0});
  k.advance_to(180);
  EXPECT_EQ(k.unserved(), 1);
  k.consume({180, EntityKind::Control, 0, trace_state::kNone, trace_state::kNone, 0});
  EXPECT_EQ(k.unserved(), 0);
  EXPECT_TRUE(k.wait_window().empty());
  EXPECT_EQ(k.vehicles(), 1);
  k.advance_to(240);
  ASSERT_EQ(k.wait_window().size(), 1u);
  EXPECT_EQ(k.wait_window()[0].t_s, 240);
}

TEST(Kpi, WindowEvictsAtTheBoundary) {
  KpiAccumulator k(12 * 3600, 60);
  k.advance_to(12 * 3600 - 60);
  EXPECT_EQ(k.wait_window().size(), 720u);
  EXPECT_EQ(k.wait_window().front().t_s, 0);
  k.advance_to(12 * 3600);
  EXPECT_EQ(k.wait_window().size(), 720u);
  EXPECT_EQ(k.wait_window().front().t_s, 60);
  EXPECT_EQ(k.state_window().front().t_s, 60);
}

TEST(Session, StartsFromTheConfig) {
  auto s = desk_session();
  const auto cfg = s.effective_config();
  EXPECT_EQ(cfg["scenario"], "Future");
  EXPECT_EQ(cfg["label"], "CC");
  EXPECT_EQ(cfg["fleet_target"], 60);
  EXPECT_EQ(cfg["config_version"], 1);
  const auto snap = s.snapshot();
  EXPECT_EQ(snap["type"], "snapshot");
  EXPECT_EQ(snap["sim_clock_s"], 0.0);
  EXPECT_EQ(snap["vehicles"].size(), 60u);
  EXPECT_EQ(snap["stations"].size(), 4u);
  EXPECT_EQ(snap["kpi"]["baselines_gco2_per_km"]["ice"], 161.97);
  EXPECT_TRUE(snap["kpi"]["gco2_per_km"].is_null());
  s.run_for(3600);
  EXPECT_GT(s.snapshot()["kpi"]["gco2_per_km"].get<double>(), 0.0);
}

TEST(Session, SpeedSwapTakesEffectNextTick) {
  auto s = desk_session();
  s.run_for(11 * 3600);
  const auto ack = s.apply_control(control("SetSpeed", 14));
  ASSERT_TRUE(ack.ok);
  EXPECT_TRUE(ack.applied);
  EXPECT_EQ(ack.effective_config["speed_kmh"], 14.0);
  EXPECT_EQ(ack.config_version, 2u);
  EXPECT_EQ(s.snapshot()["config_version"], 2);

  // Every moving vehicle covers 14 km/h * tick in the next tick.
  const auto pos = s.snapshot()["vehicles"];
  s.step();
  const auto after = s.snapshot()["vehicles"];
  int checked = 0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    if (pos[i]["state"] != after[i]["state"] || pos[i]["state"] == "Idle" || pos[i]["state"] == "Charging") continue;
    const double dx = after[i]["x_m"].get<double>() - pos[i]["x_m"].get<double>();
    const double dy = after[i]["y_m"].get<double>() - pos[i]["y_m"].get<double>();
    // Grid paths turn corners, so the straight-line step is at most the path step.
    EXPECT_LE(std::abs(dx) + std::abs(dy), 14.0 / 3.6 * 5.0 + 1e-6);
    if (std::abs(dx) + std::abs(dy) > 11.0 / 3.6 * 5.0 + 1e-6) ++checked;
  }
  EXPECT_GT(checked, 0);
}

TEST(Session, AnyControlResetsTheUnservedCounter) {
  auto s = desk_session(60, kSmallBoard);
  ASSERT_TRUE(s.apply_control(control("SetFleetSize", 2)).applied);
  s.run_for(14 * 3600);
  ASSERT_GT(s.snapshot()["kpi"]["unserved_counter"].get<int>(), 0);
  ASSERT_FALSE(s.snapshot()["kpi"]["wait_window"].empty());
  EXPECT_TRUE(s.apply_control(control("Pause")).applied);
  const auto snap = s.snapshot();
  EXPECT_EQ(snap["kpi"]["unserved_counter"], 0);
  EXPECT_TRUE(snap["kpi"]["wait_window"].empty());
  EXPECT_TRUE(snap["paused"].get<bool>());
  // Paused sessions are not stepped; the view repeats.
  EXPECT_EQ(s.snapshot()["sim_clock_s"], snap["sim_clock_s"]);
  EXPECT_TRUE(same_kpi(s));
}

TEST(Session, OrdersDropAfterFortyMinutes) {
  ScenarioConfig c;
  c.apply_scenario(ScenarioKind::CC);
  c.fleet_size = 1;
  ScenarioInputs in;
  in.network = std::make_shared<const RoadNetwork>(line_graph(2, 40000));
  Station st;
  st.id = 1;
  st.node = 1;
  in.stations = {st};
  in.orders = {order(0, 100, 1, 2)};
  in.fleet = std::vector<Vehicle>{idle_vehicle(0, 1, 35)};
  LiveSession s(c, in, std::nullopt, kSmallBoard);
  s.run_for(100 + 2400 - 5);
  EXPECT_EQ(s.snapshot()["waiting_orders"].size(), 1u);
  EXPECT_EQ(s.snapshot()["kpi"]["unserved_counter"], 0);
  s.step();
  EXPECT_EQ(s.clock_s(), 2500.0);
  EXPECT_TRUE(s.snapshot()["waiting_orders"].empty());
  EXPECT_EQ(s.snapshot()["kpi"]["unserved_counter"], 1);
  const auto r = s.report();
  EXPECT_EQ(r.unserved_count, 1);
  EXPECT_EQ(r.delivered_count, 0);
  // Dropped orders do not enter the wait samples.
  const auto snap = s.snapshot();
  for (const auto& w : snap["kpi"]["wait_window"]) EXPECT_EQ(w["delivered"], 0);
}

TEST(Session, FleetShrinksMonotonicallyToTarget) {
  auto s = desk_session(5, kSmallBoard);
  s.run_for(12 * 3600);  // lunch peak: most of the five are busy
  const auto busy = [&] {
    int n = 0;
    const auto snap = s.snapshot();
    for (const auto& v : snap["vehicles"]) n += v["state"] != "Idle";
    return n;
  };
  ASSERT_GE(busy(), 3);
  std::set<std::int64_t> before;
  const auto start = s.snapshot();
  for (const auto& v : start["vehicles"]) before.insert(v["id"].get<std::int64_t>());
  ASSERT_TRUE(s.apply_control(control("SetFleetSize", 1)).applied);
  std::size_t last = s.snapshot()["vehicles"].size();
  EXPECT_GT(last, 1u);  // busy vehicles stay until their task is done
  for (int k = 0; k < 3000 && last > 1; ++k) {
    s.step();
    const std::size_t now = s.snapshot()["vehicles"].size();
    EXPECT_LE(now, last);
    last = now;
  }
  EXPECT_EQ(last, 1u);
  const auto left = s.snapshot()["vehicles"][0]["id"].get<std::int64_t>();
  EXPECT_TRUE(before.count(left));
  s.run_for(3600);
  EXPECT_EQ(s.snapshot()["vehicles"].size(), 1u);

  // Removed vehicles only ever leave from Idle or after finishing a task.
  const auto trace = s.trace();
  for (const auto& r : trace.records) {
    if (r.entity == EntityKind::Vehicle && r.to == trace_state::kRemoved) {
      EXPECT_TRUE(r.from == static_cast<std::int8_t>(VehicleState::Idle) ||
                  r.from == static_cast<std::int8_t>(VehicleState::ToCharge) ||
                  r.from == static_cast<std::int8_t>(VehicleState::Charging))
          << state_name(EntityKind::Vehicle, r.from);
    }
  }
  EXPECT_TRUE(same_kpi(s));
}

TEST(Session, GrowAddsVehicles) {
  auto s = desk_session(60);
  ASSERT_TRUE(s.apply_control(control("SetFleetSize", 75)).applied);
  s.step();
  EXPECT_EQ(s.snapshot()["vehicles"].size(), 75u);
  std::set<std::int64_t> ids;
  const auto snap = s.snapshot();
  for (const auto& v : snap["vehicles"]) ids.insert(v["id"].get<std::int64_t>());
  EXPECT_EQ(ids.size(), 75u);
}

TEST(Session, ClampingAndScenarioGating) {
  auto s = desk_session();
  auto ack = s.apply_control(control("SetFleetSize", 500));
  EXPECT_TRUE(ack.applied);
  EXPECT_EQ(ack.effective_config["fleet_target"], 300);
  ASSERT_EQ(ack.warnings.size(), 1u);
  ack = s.apply_control(control("SetSpeed", 25));
  EXPECT_EQ(ack.effective_config["speed_kmh"], 20.0);
  EXPECT_EQ(ack.warnings.size(), 1u);
  ack = s.apply_control(control("SetSpeed", 2));
  EXPECT_EQ(ack.effective_config["speed_kmh"], 6.0);
  ack = s.apply_control(control("SetElectrified", true));
  EXPECT_FALSE(ack.applied);
  EXPECT_EQ(ack.warnings.size(), 1u);
  const auto version = s.config_version();

  ack = s.apply_control(control("SetScenario", "Current"));
  EXPECT_TRUE(ack.applied);
  EXPECT_EQ(ack.effective_config["label"], "ICE");
  EXPECT_EQ(ack.effective_config["vehicle_class"], "ICECar");
  EXPECT_EQ(ack.effective_config["fleet_target"], 40);
  ack = s.apply_control(control("SetBattery", "large"));
  EXPECT_FALSE(ack.applied);
  ack = s.apply_control(control("SetElectrified", true));
  EXPECT_EQ(ack.effective_config["label"], "BEV");
  EXPECT_EQ(ack.effective_config["fleet_target"], 45);
  EXPECT_EQ(s.config_version(), version + 2);
  s.step();
  EXPECT_EQ(s.snapshot()["kpi"]["gco2_per_km"], 107.53);

  ack = s.apply_control(control("SetScenario", "Future"));
  ack = s.apply_control(control("SetStrategy", "FC"));
  EXPECT_EQ(ack.effective_config["label"], "FC");
  // 50 km sits on the small/large midpoint, so the board started on large.
  EXPECT_EQ(ack.effective_config["range_km"], 65.0);
  ack = s.apply_control(control("SetBattery", "small"));
  EXPECT_EQ(ack.effective_config["range_km"], 35.0);
  ack = s.apply_control(control("SetBattery", "large"));
  EXPECT_EQ(ack.effective_config["range_km"], 65.0);
  EXPECT_EQ(ack.effective_config["fleet_target"], 300);
  EXPECT_EQ(s.snapshot()["stations"].size(), 4u);
  s.run_for(600);
  EXPECT_TRUE(same_kpi(s));
}

TEST(Session, MalformedControlsAreRejected) {
  auto s = desk_session();
  const auto version = s.config_version();
  for (const std::string text : {"not json", "[]", "{\"value\":3}", "{\"type\":\"Explode\"}",
                                 "{\"type\":\"SetFleetSize\",\"value\":\"many\"}",
                                 "{\"type\":\"SetTimeScale\",\"value\":0}",
                                 "{\"type\":\"SetScenario\",\"value\":\"Past\"}",
                                 "{\"type\":\"SetStrategy\",\"value\":\"XX\"}"}) {
    const auto ack = s.apply_control_text(text);
    EXPECT_FALSE(ack.ok) << text;
    const auto j = ack.to_json();
    EXPECT_EQ(j["type"], "error");
    EXPECT_FALSE(j["message"].get<std::string>().empty());
  }
  EXPECT_EQ(s.config_version(), version);
  EXPECT_TRUE(s.trace().controls.empty());
  const auto ok = s.apply_control_text("{\"type\":\"SetTimeScale\",\"value\":600}");
  EXPECT_TRUE(ok.ok);
  EXPECT_EQ(s.time_scale(), 600.0);
  EXPECT_EQ(ok.to_json()["type"], "ack");
  ASSERT_EQ(s.trace().controls.size(), 1u);
}

TEST(Session, ReplayMatchesStreamForEveryPrefix) {
  auto s = desk_session(60, kSmallBoard);
  const json script[] = {control("SetFleetSize", 8), control("SetSpeed", 16), control("SetStrategy", "NC"),
                         control("SetBattery", "large"), control("SetFleetSize", 90)};
  std::size_t next = 0;
  for (int hour = 1; hour <= 20; ++hour) {
    s.run_for(3600);
    if (hour % 4 == 0 && next < std::size(script)) s.apply_control(script[next++]);
    ASSERT_TRUE(same_kpi(s)) << "hour " << hour;
  }
  // Replaying a shorter prefix reproduces what was streamed at that time.
  auto t = desk_session(60, kSmallBoard);
  t.run_for(7 * 3600);
  const auto mid = to_json(t.kpi());
  const auto mid_clock = t.clock_s();
  const auto mid_records = t.trace().records.size();
  t.apply_control(control("SetFleetSize", 8));
  t.run_for(5 * 3600);
  const auto replayed = KpiAccumulator::replay(t.trace(), mid_records, mid_clock, 12 * 3600, 60);
  EXPECT_EQ(to_json(replayed), mid);
}

TEST(Session, ConfigDocument) {
  const auto s = desk_session();
  const auto doc = s.config_document();
  EXPECT_EQ(doc["network"]["nodes"].size(), 100u);
  EXPECT_EQ(doc["limits"]["fleet_min"], 60);
  EXPECT_EQ(doc["limits"]["speed_max_kmh"], 20.0);
  EXPECT_EQ(doc["stations"].size(), 4u);
  EXPECT_EQ(doc["effective_config"]["config_version"], 1);
}
