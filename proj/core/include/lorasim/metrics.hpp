#ifndef LORASIM_METRICS_HPP
#define LORASIM_METRICS_HPP

#include <cstdint>
#include <map>
#include <string>

#include "json.hpp"

namespace lorasim::sim {

struct DeviceMetrics {
  int sf = 7;
  std::int64_t uplinks_sent = 0;
  std::int64_t delivered = 0; // unique (DevAddr, fcnt) accepted at the server
  std::int64_t acked_genuine = 0;
  std::int64_t acked_spoofed = 0;
  std::int64_t presumed_lost = 0;
  std::int64_t rejected_counter = 0;
  std::int64_t rejected_mic = 0;
  std::int64_t retransmissions = 0;
  bool inversion_observed = false;
};

struct GatewayMetrics {
  std::string eui;
  int sf_label = 0; // set by sweep scenarios; 0 = unlabeled
  std::int64_t receptions = 0;
  std::int64_t receptions_crc_failed = 0;
  double corrupt_fraction = 0;
  std::int64_t pushes = 0;
  std::int64_t pushes_stat_corrupt = 0;
  std::int64_t pulls_sent = 0;
  std::int64_t pull_resps = 0;
  std::int64_t tx_acks_sent = 0;
};

struct ServerMetrics {
  std::int64_t push_data = 0;
  std::int64_t pull_data = 0;
  std::int64_t uplinks_accepted = 0;
  std::int64_t duplicates_dropped = 0;
  std::int64_t acks_sent = 0;
  std::int64_t downlinks_sent = 0;
  std::int64_t downlinks_dropped_no_route = 0;
  std::int64_t untrusted_datagrams = 0;
  std::int64_t unauthenticated_dropped = 0;
  std::int64_t undecodable_bodies = 0;
  std::int64_t probe_downlinks = 0;
  std::int64_t copies_total = 0;   // stat-bearing uplink copies observed
  std::int64_t copies_corrupt = 0; // of those, stat = -1
  std::int64_t copies_total_attack = 0; // same, restricted to t >= attack_start
  std::int64_t copies_corrupt_attack = 0;
  double corrupt_fraction = 0;
  double corrupt_fraction_attack = 0;
  std::map<std::string, std::int64_t> downlinks_by_address;
  std::map<std::string, std::int64_t> downlinks_by_address_measured; // t >= measure_start
};

struct AttackerMetrics {
  std::string sniff_result = "not_attempted"; // sniffed | failed | not_attempted
  std::string eui_source = "none";            // sniffed | registry | none
  std::string stolen_eui;
  std::string final_phase = "idle";
  bool disable_refused = false;
  std::int64_t forwarded_pushes = 0;
  std::int64_t withheld_acks = 0;
  std::int64_t suppressed_uplinks = 0;
  std::int64_t replays = 0;
  std::int64_t pulls_sent = 0;
  std::int64_t jam_bursts = 0;
  std::int64_t recordings_corrupt = 0;
  std::int64_t triggers_too_late = 0;
};

struct IdsMetrics {
  std::map<std::string, std::int64_t> alerts_by_kind;
  std::int64_t total = 0;
};

struct MetricsReport {
  std::string scenario;
  std::uint64_t seed = 0;
  double horizon_ms = 0;
  std::int64_t events = 0;
  std::map<std::string, DeviceMetrics> devices;   // by device id
  std::map<std::string, GatewayMetrics> gateways; // by gateway id
  ServerMetrics server;
  bool has_attacker = false;
  AttackerMetrics attacker;
  IdsMetrics ids;

  nlohmann::json to_json() const;
  // One row per device and gateway plus a server row; sweep scenarios get one
  // gateway row per SF.
  std::string to_csv() const;
};

} // namespace lorasim::sim

#endif
