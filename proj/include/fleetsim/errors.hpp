#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fleetsim {

/// Base class for every error raised by the simulator.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed record in one of the text inputs. `line` is 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DisconnectedGraph : public Error {
 public:
  explicit DisconnectedGraph(std::int64_t node)
      : Error("road network is not strongly connected; orphan component contains node " +
              std::to_string(node)),
        node_(node) {}
  std::int64_t node() const { return node_; }

 private:
  std::int64_t node_;
};

class UnknownNode : public Error {
 public:
  explicit UnknownNode(std::int64_t node, std::size_t row = 0)
      : Error(row ? "row " + std::to_string(row) + ": unknown node " + std::to_string(node)
                  : "unknown node " + std::to_string(node)),
        node_(node),
        row_(row) {}
  std::int64_t node() const { return node_; }
  std::size_t row() const { return row_; }

 private:
  std::int64_t node_;
  std::size_t row_;
};

class SameOriginDestination : public Error {
 public:
  explicit SameOriginDestination(std::size_t row)
      : Error("row " + std::to_string(row) + ": restaurant and destination are the same node"),
        row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class NegativeTime : public Error {
 public:
  explicit NegativeTime(std::size_t row)
      : Error("row " + std::to_string(row) + ": negative placement time"), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class DegenerateProfile : public Error {
 public:
  using Error::Error;
};

class BatteryUnderflow : public Error {
 public:
  using Error::Error;
};

class NotAtStation : public Error {
 public:
  using Error::Error;
};

class NoStations : public Error {
 public:
  NoStations() : Error("no charging stations configured") {}
};

class Stalled : public Error {
 public:
  using Error::Error;
};

class ZeroDistance : public Error {
 public:
  ZeroDistance() : Error("total distance must be positive") {}
};

class NonPositiveInput : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class SessionClosed : public Error {
 public:
  SessionClosed() : Error("session closed") {}
};

}  // namespace fleetsim
