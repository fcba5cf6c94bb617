#pragma once

#include <memory>
#include <string>

#include "fleetsim/scenario.hpp"
#include "fleetsim/server/session.hpp"

namespace fleetsim::server {

/// HTTP + WebSocket front end for one LiveSession.
///
///   GET /health    {"status":"ok"}
///   GET /config    effective config, network geometry, stations, limits
///   GET /report    metrics of the trace so far
///   WS  /session   JSON controls in; acks and snapshots out
///
/// Network I/O runs on one thread and the simulation on another, which
/// advances the clock by wall time x time_scale in whole ticks. Snapshots
/// are published at snapshot_hz; a slow client only ever holds the newest.
class Server {
 public:
  /// `port` 0 picks a free port; see port() after start().
  Server(std::shared_ptr<LiveSession> session, std::string bind_address, unsigned short port);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  void start();
  void stop();
  unsigned short port() const;
  LiveSession& session();

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

/// Loads inputs, starts a server on FLEETSIM_BIND (default 127.0.0.1) and
/// blocks until SIGINT or SIGTERM. Returns the process exit code.
int serve(const ScenarioConfig& config, int port);

}  // namespace fleetsim::server
