#pragma once

#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "fleetsim/engine.hpp"
#include "fleetsim/impact.hpp"
#include "fleetsim/metrics.hpp"
#include "fleetsim/scenario.hpp"

namespace fleetsim::server {

using nlohmann::json;

struct WaitWindowSample {
  double t_s = 0.0;
  /// Mean wait of the orders delivered in (t_s - sample_s, t_s]; empty if none.
  std::optional<double> avg_wait_min;
  std::int64_t delivered = 0;

  bool operator==(const WaitWindowSample&) const = default;
};

struct StateWindowSample {
  double t_s = 0.0;
  StateCounts counts{};

  bool operator==(const StateWindowSample&) const = default;
};

/// Dashboard indicators derived from the event trace alone, so that a
/// replay of any trace prefix reproduces what was streamed.
///
/// Samples are taken at multiples of sample_s. A sample at T covers every
/// record stamped <= T except control records, which are applied after the
/// tick they are stamped with. Any control record clears the windows and the
/// unserved counter.
class KpiAccumulator {
 public:
  KpiAccumulator(double window_s, double sample_s);

  void consume(const TraceRecord& record);
  /// Emits all samples at times <= clock_s not yet emitted.
  void advance_to(double clock_s);

  /// Feeds `trace.records[0, prefix)` and samples up to `clock_s`.
  static KpiAccumulator replay(const EventTrace& trace, std::size_t prefix, double clock_s, double window_s,
                               double sample_s);

  const std::deque<WaitWindowSample>& wait_window() const { return wait_; }
  const std::deque<StateWindowSample>& state_window() const { return states_; }
  std::int64_t unserved() const { return unserved_; }
  double km_since_reset() const { return km_; }
  double reset_at_s() const { return reset_at_s_; }
  std::int64_t vehicles() const;

 private:
  void emit_through(double limit_s, bool inclusive);

  double window_s_;
  double sample_s_;
  std::int64_t next_sample_ = 0;
  StateCounts counts_{};
  std::unordered_map<std::int64_t, double> placed_at_;
  double interval_wait_s_ = 0.0;
  std::int64_t interval_delivered_ = 0;
  std::int64_t unserved_ = 0;
  double km_ = 0.0;
  double reset_at_s_ = 0.0;
  std::deque<WaitWindowSample> wait_;
  std::deque<StateWindowSample> states_;
};

json to_json(const KpiAccumulator& kpi);

/// Slider ranges and board options of the live session.
struct ControlLimits {
  std::size_t fleet_min = 60;
  std::size_t fleet_max = 300;
  double speed_min = 6.0;
  double speed_max = 20.0;
};

struct Ack {
  bool ok = true;
  bool applied = false;
  std::vector<std::string> warnings;
  std::string error;
  json effective_config;
  std::uint64_t config_version = 0;

  json to_json() const;
};

/// One Live-mode engine plus the board state. All public methods are
/// thread-safe; controls are applied between ticks under the session lock,
/// so a snapshot never mixes old and new configuration.
class LiveSession {
 public:
  LiveSession(ScenarioConfig config, const ScenarioInputs& inputs,
              std::optional<EmissionCoefficients> coefficients = std::nullopt, ControlLimits limits = {});

  /// Parses and applies one control message.
  Ack apply_control(const json& message);
  Ack apply_control_text(const std::string& text);

  /// One engine tick, then KPI sampling.
  void step();
  /// Ticks until the clock has advanced by at least `sim_seconds`.
  void run_for(double sim_seconds);

  bool paused() const;
  double time_scale() const;
  double tick_s() const;
  double snapshot_hz() const;
  std::uint64_t config_version() const;
  double clock_s() const;

  json effective_config() const;
  json snapshot() const;
  /// Static geometry for clients: nodes, edges, stations, limits.
  json config_document() const;
  MetricsReport report() const;
  EventTrace trace() const;
  /// KPI state as streamed, for comparison with KpiAccumulator::replay.
  KpiAccumulator kpi() const;

 private:
  json effective_config_locked() const;
  void apply_board_locked();
  std::string label_locked() const;

  mutable std::mutex mutex_;
  ScenarioConfig base_;
  std::optional<EmissionCoefficients> coefficients_;
  ControlLimits limits_;
  std::unique_ptr<Engine> engine_;
  KpiAccumulator kpi_;
  std::size_t consumed_ = 0;

  // Board state.
  bool future_ = true;
  bool electrified_ = false;
  StrategyKind strategy_ = StrategyKind::CC;
  bool large_battery_ = false;
  std::size_t fleet_ = 0;
  double speed_kmh_ = 11.0;
  bool paused_ = false;
  double time_scale_ = 60.0;
  std::uint64_t config_version_ = 1;
};

}  // namespace fleetsim::server
