#ifndef LORASIM_ATTACKS_HPP
#define LORASIM_ATTACKS_HPP

// Attacker toolkit: identifier theft, gateway disabling, impostor forwarding
// under the stolen EUI, PULL_DATA flooding, four jammer variants, and the
// ACK withhold-and-replay procedure. Step ordering is enforced: nothing is
// forwarded until an EUI is stolen and the victim is disabled or jammed.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lorasim/codec.hpp"
#include "lorasim/mac.hpp"
#include "lorasim/metrics.hpp"
#include "lorasim/nodes.hpp"
#include "lorasim/radio.hpp"

namespace lorasim::attacks {

using nodes::NodeServices;
using sim::SimTime;

enum class AttackMode { Idle, ImpostorDisconnect, ImpostorJam };
enum class JammerKind { Constant, Triggered, Selective, Wormhole };
enum class AckSpoofPhase { AwaitTarget, Withholding, Replaying, Done };

const char* to_string(AttackMode m);
const char* to_string(JammerKind k);
const char* to_string(AckSpoofPhase p);
std::optional<JammerKind> jammer_kind_from_string(std::string_view s);

struct JammerConfig {
  JammerKind kind = JammerKind::Wormhole;
  std::vector<mac::DevAddr> targets; // required for selective/wormhole
  double trigger_latency_ms = 10;
  double detect_latency_ms = 5;      // triggered: carrier-sense reaction time
  double header_scan_fraction = 0.25;
  double record_tail_fraction = 0.1;
};

struct AttackerConfig {
  std::string id = "atk";
  int gw_node = -1;     // rogue gateway / recorder radio
  int jammer_node = -1; // jamming radio
  std::string addr;     // logical network address of the rogue gateway
  std::string server_addr;
  AttackMode mode = AttackMode::Idle;
  double attack_start_ms = 0;
  double pull_flood_factor = 1; // PULL_DATA rate multiplier over the victim's
  bool impostor = true;         // false = jammer-only run, no EUI needed
  bool ack_spoof = false;
  bool registry_access = false; // EUI obtainable from the public export
  JammerConfig jammer;
  double forward_latency_ms = 5;
  double pull_interval_ms = 10000; // victim's keepalive period
  nodes::PullJitter pull_jitter = nodes::PullJitter::None;
  double channel_mhz = 868.1;
  double base_airtime_ms = radio::kDefaultBaseAirtimeMs;
  nodes::RxWindows rx;
  nodes::LinkAttrs link; // the attacker's own link; never authenticated in practice
};

struct AttackerState {
  std::optional<codec::GatewayEui> stolen_eui;
  bool active = false;
  bool jammer_active = false;
  bool victim_disabled = false;
  AckSpoofPhase phase = AckSpoofPhase::AwaitTarget;
  std::optional<Bytes> recorded_ack;
  int recorded_sf = 7;
  double recorded_freq = 868.1;
  std::optional<mac::DevAddr> target_dev;
  std::uint16_t withheld_for_fcnt = 0;
  std::uint16_t dropped_fcnt = 0;
};

class Attacker {
 public:
  Attacker(NodeServices services, AttackerConfig cfg, radio::Ether* ether, Rng rng,
           sim::AttackerMetrics* metrics);

  void start(); // schedules the attack at attack_start_ms

  // Wired by the scenario runner:
  // Disables the victim gateway; false when physical protection refuses it.
  std::function<bool()> disable_victim;
  // EUI from public sources (registry export); empty when inaccessible.
  std::function<std::optional<codec::GatewayEui>()> lookup_victim_eui;

  void on_sniffed(const Bytes& raw);             // tap on the victim's link
  void on_frame_start(const radio::RadioFrame& f);
  void on_reception(const radio::Reception& r);  // at the rogue gateway node
  void on_datagram(const Bytes& raw);            // from the server

  void stop_jamming(); // scenario lever; delivery resumes within a retransmit cycle

  const AttackerState& state() const { return state_; }
  bool impostor_active() const { return impostor_active_; }
  const AttackerConfig& config() const { return cfg_; }

 private:
  void begin_attack();
  void keepalive();
  void forward(const radio::Reception& r);
  void schedule_replay();
  void trace(const char* ev, nlohmann::json fields);
  void set_phase(AckSpoofPhase p);
  bool is_target(const mac::DevAddr& a) const;

  NodeServices sv_;
  AttackerConfig cfg_;
  radio::Ether* ether_;
  Rng rng_;
  sim::AttackerMetrics* metrics_;
  AttackerState state_;
  bool impostor_active_ = false;
  bool awaiting_sniff_ = false;
  std::optional<codec::GatewayEui> sniffed_eui_;
  std::map<mac::DevAddr, std::uint16_t> last_seen_up_fcnt_;
};

} // namespace lorasim::attacks

#endif
