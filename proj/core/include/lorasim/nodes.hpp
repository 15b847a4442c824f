#ifndef LORASIM_NODES_HPP
#define LORASIM_NODES_HPP

// State machines for Class A end devices, packet-forwarding gateways, the
// network server with downlink-route selection, and the gateway registry.
// Nodes talk to the world through NodeServices hooks, so each machine can be
// driven directly in tests without the full simulation around it.

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lorasim/codec.hpp"
#include "lorasim/event_queue.hpp"
#include "lorasim/ids.hpp"
#include "lorasim/mac.hpp"
#include "lorasim/metrics.hpp"
#include "lorasim/radio.hpp"
#include "lorasim/rng.hpp"
#include "lorasim/trace.hpp"

namespace lorasim::nodes {

using sim::SimTime;

struct RxWindows {
  double rx1_delay_ms = 1000;
  double rx2_delay_ms = 2000;
  double width_ms = 200;
};

// Per gateway<->server link; securing that connection is a link attribute.
struct LinkAttrs {
  bool eavesdroppable = true;
  bool authenticated = false;
};

struct NodeServices {
  std::function<SimTime()> now;
  std::function<void(SimTime at, std::function<void()>)> schedule_at;
  std::function<void(const std::string& from, const std::string& to, Bytes)> send_dgram;
  std::function<void(Bytes payload, int sf, double channel_mhz, int node)> transmit;
  sim::TraceWriter* trace = nullptr;
};

// ---------------------------------------------------------------------------
// Registry

struct RegistryEntry {
  codec::GatewayEui eui;
  std::string name; // "eui-" + hex, derived when empty
  std::string location;
  bool trusted = true;
  double last_seen = -1;
};

class Registry {
 public:
  bool add(RegistryEntry entry); // false on duplicate EUI
  const RegistryEntry* find(const codec::GatewayEui& eui) const;
  void touch(const codec::GatewayEui& eui, double t);
  std::size_t size() const { return entries_.size(); }

  // Gateway-data document: [{id, description, location, last-seen}, ...]
  std::string export_json() const;

 private:
  std::map<codec::GatewayEui, RegistryEntry> entries_;
};

// ---------------------------------------------------------------------------
// End device

struct DeviceConfig {
  std::string id = "dev";
  int node = -1;
  mac::DevAddr dev_addr;
  mac::NwkSKey key;
  int sf = 7;
  double channel_mhz = 868.1;
  bool confirmed = true;
  int retransmit_limit = 3;
  std::size_t payload_len = 25; // 25-byte payload -> 37-byte frame
  mac::MicMode mic_mode = mac::MicMode::V1_0;
  RxWindows rx;
  double base_airtime_ms = radio::kDefaultBaseAirtimeMs;
};

struct UplinkRecord {
  std::uint16_t fcnt = 0;
  enum class Outcome { InFlight, Acked, PresumedLost } outcome = Outcome::InFlight;
  int attempts = 0; // retransmissions beyond the first send
  bool spoofed = false;
  std::uint16_t ack_down_fcnt = 0;
  double resolved_at = -1;
};

class EndDevice {
 public:
  EndDevice(NodeServices services, DeviceConfig cfg, sim::DeviceMetrics* metrics);

  // Confirmed uplink with the configured payload length. Returns false while
  // a confirmed uplink is still pending (busy).
  bool send_confirmed();
  void send_unconfirmed();
  void on_reception(const radio::Reception& r);

  // Classification hook: given (dev_addr, ack downlink fcnt, pending uplink
  // fcnt), returns whether the accepted ACK was generated for this uplink.
  // Unset means genuine (standalone tests).
  std::function<bool(const mac::DevAddr&, std::uint16_t, std::uint16_t)> classify_ack;

  bool busy() const { return pending_.has_value(); }
  std::uint16_t fcnt_up() const { return fcnt_up_; }
  std::uint16_t last_down_fcnt() const { return last_down_fcnt_; }
  const std::vector<UplinkRecord>& log() const { return log_; }
  const DeviceConfig& config() const { return cfg_; }

 private:
  struct Pending {
    Bytes frame_bytes;
    std::uint16_t fcnt = 0;
    int attempts = 0;
    SimTime last_tx_end = 0;
    std::uint64_t serial = 0; // distinguishes stale retransmit timers
  };

  void transmit_attempt();
  void on_rx2_close(std::uint64_t serial, int attempt);
  bool in_window(SimTime t) const;
  void trace(const char* ev, nlohmann::json fields);

  NodeServices sv_;
  DeviceConfig cfg_;
  sim::DeviceMetrics* metrics_;
  std::uint16_t fcnt_up_ = 0;
  std::uint16_t last_down_fcnt_ = 0;
  std::uint64_t next_serial_ = 0;
  std::optional<Pending> pending_;
  std::vector<UplinkRecord> log_;
};

// ---------------------------------------------------------------------------
// Gateway

enum class CrcForwardPolicy { ForwardWithStat, Drop };
enum class PullJitter { None, Exponential };

struct GatewayConfig {
  std::string id = "gw";
  int node = -1;
  codec::GatewayEui eui;
  std::string addr;        // logical network address, e.g. "10.0.1.10:34001"
  std::string server_addr;
  double pull_interval_ms = 10000;
  double first_pull_ms = 1000;
  CrcForwardPolicy crc_policy = CrcForwardPolicy::ForwardWithStat;
  PullJitter pull_jitter = PullJitter::None;
  double forward_latency_ms = 0;
  bool registered = true;
  bool physically_protected = false;
  LinkAttrs link;
};

class Gateway {
 public:
  Gateway(NodeServices services, GatewayConfig cfg, Rng rng, sim::GatewayMetrics* metrics);

  void start(); // begins the PULL_DATA keepalive loop
  void set_alive(bool alive);
  bool alive() const { return alive_; }

  // Returns the PUSH_DATA that was sent, if any (crc failures under the Drop
  // policy and dead gateways produce nothing).
  std::optional<codec::Datagram> on_radio_rx(const radio::Reception& r);
  void on_datagram(const Bytes& raw);

  const GatewayConfig& config() const { return cfg_; }

 private:
  void keepalive();

  NodeServices sv_;
  GatewayConfig cfg_;
  Rng rng_;
  sim::GatewayMetrics* metrics_;
  bool alive_ = true;
};

// ---------------------------------------------------------------------------
// Network server

enum class RoutePolicy { LastPullWins, StickyFirst, MostFrequent };

const char* to_string(RoutePolicy p);
std::optional<RoutePolicy> route_policy_from_string(std::string_view s);

struct ServerConfig {
  std::string addr = "10.0.0.1:1700";
  bool require_registration = false;
  bool require_authenticated_link = false;
  RoutePolicy route_policy = RoutePolicy::LastPullWins;
  mac::MicMode mic_mode = mac::MicMode::V1_0;
  RxWindows rx;
  double most_frequent_window_ms = 60000;
  double channel_mhz = 868.1;
  double base_airtime_ms = radio::kDefaultBaseAirtimeMs;
  // Downlink probe driver for route-capture experiments; disabled at 0.
  double probe_interval_ms = 0;
  double probe_start_ms = 0;
  bool probe_jitter = true;
  int probe_sf = 7;
  std::vector<codec::GatewayEui> probe_euis;
  double measure_start_ms = 0; // downlinks_by_address_measured counts t >= this
  double attack_start_ms = -1; // attack-phase corrupt share counters; <0 = off
};

class Server {
 public:
  Server(NodeServices services, ServerConfig cfg, Registry* registry, Rng rng,
         sim::ServerMetrics* metrics);

  void add_device(const mac::DevAddr& addr, const mac::NwkSKey& key);
  void start(); // probe driver, when configured

  void on_datagram(const std::string& from_addr, const LinkAttrs& link, const Bytes& raw);

  // Routed downlink; drops (and counts) when no PULL_DATA opened a route.
  void send_downlink(const codec::GatewayEui& eui, const mac::MacFrame& frame, int sf);

  std::optional<std::string> route_for(const codec::GatewayEui& eui) const;
  bool uplink_accepted(const mac::DevAddr& dev, std::uint16_t fcnt) const;
  // Ground truth: which uplink counter a generated ACK acknowledged.
  std::optional<std::uint16_t> acked_uplink_for(const mac::DevAddr& dev,
                                                std::uint16_t down_fcnt) const;

  std::function<void(const ids::Observation&)> observe;
  std::function<void(const mac::DevAddr&, std::uint16_t fcnt)> on_uplink_accepted;

  const ServerConfig& config() const { return cfg_; }

 private:
  struct RouteState {
    std::string addr;
    double last_pull = -1;
    std::string first_addr;
    std::map<std::string, std::deque<double>> arrivals;
  };

  void handle_push_data(const codec::Datagram& d, const std::string& from);
  void handle_pull_data(const codec::Datagram& d, const std::string& from);
  void update_route(const codec::GatewayEui& eui, const std::string& from);
  void probe_tick();
  void trace(const char* ev, nlohmann::json fields);

  NodeServices sv_;
  ServerConfig cfg_;
  Registry* registry_;
  Rng rng_;
  sim::ServerMetrics* metrics_;
  std::map<codec::GatewayEui, RouteState> routes_;
  std::set<std::pair<mac::DevAddr, std::uint16_t>> dedup_;
  std::map<mac::DevAddr, std::uint16_t> down_fcnt_;
  std::map<std::pair<mac::DevAddr, std::uint16_t>, std::uint16_t> ack_truth_;
  std::map<mac::DevAddr, mac::NwkSKey> keys_;
  std::uint16_t probe_fcnt_ = 0;
};

} // namespace lorasim::nodes

#endif
