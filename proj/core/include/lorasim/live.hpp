#ifndef LORASIM_LIVE_HPP
#define LORASIM_LIVE_HPP

// Live-wire mode: the scenario's network server bound to a real UDP socket,
// speaking the bit-exact packet-forwarder format. Intended for interop smoke
// tests against a real forwarder; none of the acceptance machinery needs it.

#include <string>

#include "lorasim/metrics.hpp"
#include "lorasim/scenario.hpp"

namespace lorasim::live {

class LiveWire {
 public:
  // bind_addr is "ip:port"; port 0 picks an ephemeral port.
  // Throws std::runtime_error when the socket cannot be bound.
  LiveWire(const sim::Scenario& scenario, const std::string& bind_addr);
  ~LiveWire();

  LiveWire(const LiveWire&) = delete;
  LiveWire& operator=(const LiveWire&) = delete;

  int port() const { return port_; }

  // Serves for duration_ms of wall time (forever when <= 0), then returns the
  // metrics collected. Single-threaded: socket intake and the event loop share
  // this call.
  sim::MetricsReport run_for(double duration_ms);

 private:
  struct Impl;
  Impl* impl_;
  int port_ = 0;
};

} // namespace lorasim::live

#endif
