#include "lorasim/attacks.hpp"

#include <algorithm>
#include <limits>

namespace lorasim::attacks {

using nlohmann::json;

const char* to_string(AttackMode m) {
  switch (m) {
    case AttackMode::Idle: return "idle";
    case AttackMode::ImpostorDisconnect: return "impostor_disconnect";
    case AttackMode::ImpostorJam: return "impostor_jam";
  }
  return "?";
}

const char* to_string(JammerKind k) {
  switch (k) {
    case JammerKind::Constant: return "constant";
    case JammerKind::Triggered: return "triggered";
    case JammerKind::Selective: return "selective";
    case JammerKind::Wormhole: return "wormhole";
  }
  return "?";
}

const char* to_string(AckSpoofPhase p) {
  switch (p) {
    case AckSpoofPhase::AwaitTarget: return "await_target";
    case AckSpoofPhase::Withholding: return "withholding";
    case AckSpoofPhase::Replaying: return "replaying";
    case AckSpoofPhase::Done: return "done";
  }
  return "?";
}

std::optional<JammerKind> jammer_kind_from_string(std::string_view s) {
  if (s == "constant") return JammerKind::Constant;
  if (s == "triggered") return JammerKind::Triggered;
  if (s == "selective") return JammerKind::Selective;
  if (s == "wormhole") return JammerKind::Wormhole;
  return std::nullopt;
}

Attacker::Attacker(NodeServices services, AttackerConfig cfg, radio::Ether* ether, Rng rng,
                   sim::AttackerMetrics* metrics)
    : sv_(std::move(services)),
      cfg_(std::move(cfg)),
      ether_(ether),
      rng_(std::move(rng)),
      metrics_(metrics) {}

void Attacker::trace(const char* ev, json fields) {
  if (!sv_.trace) return;
  fields["node"] = cfg_.id;
  sv_.trace->event(sv_.now(), ev, std::move(fields));
}

void Attacker::set_phase(AckSpoofPhase p) {
  if (state_.phase == p) return;
  trace("attacker_phase", {{"from", to_string(state_.phase)}, {"to", to_string(p)}});
  state_.phase = p;
  if (metrics_) metrics_->final_phase = to_string(p);
}

bool Attacker::is_target(const mac::DevAddr& a) const {
  return std::find(cfg_.jammer.targets.begin(), cfg_.jammer.targets.end(), a) !=
         cfg_.jammer.targets.end();
}

void Attacker::start() {
  if (cfg_.mode == AttackMode::Idle) return;
  sv_.schedule_at(cfg_.attack_start_ms, [this] { begin_attack(); });
}

void Attacker::on_sniffed(const Bytes& raw) {
  auto res = codec::decode_datagram(raw);
  if (!res.ok()) return;
  if (res.datagram->kind != codec::DatagramKind::PushData &&
      res.datagram->kind != codec::DatagramKind::PullData)
    return;
  if (!sniffed_eui_) {
    sniffed_eui_ = res.datagram->eui;
    trace("sniff_eui", {{"eui", sniffed_eui_->to_string()}});
  }
  if (awaiting_sniff_) {
    awaiting_sniff_ = false;
    begin_attack();
  }
}

void Attacker::begin_attack() {
  if (state_.active) return;

  if (cfg_.impostor && !state_.stolen_eui) {
    if (sniffed_eui_) {
      state_.stolen_eui = sniffed_eui_;
      if (metrics_) {
        metrics_->sniff_result = "sniffed";
        metrics_->eui_source = "sniffed";
      }
    } else {
      if (metrics_) metrics_->sniff_result = "failed";
      trace("sniff_failed", {});
      if (cfg_.registry_access && lookup_victim_eui) {
        if (auto eui = lookup_victim_eui()) {
          state_.stolen_eui = eui;
          if (metrics_) metrics_->eui_source = "registry";
          trace("eui_from_registry", {{"eui", eui->to_string()}});
        }
      }
      if (!state_.stolen_eui) {
        // Keep listening; the attack begins on the next sniffed identifier.
        awaiting_sniff_ = true;
        trace("attack_waiting_for_eui", {});
        return;
      }
    }
    if (metrics_) metrics_->stolen_eui = state_.stolen_eui->to_string();
  }

  if (cfg_.mode == AttackMode::ImpostorDisconnect) {
    if (!disable_victim || !disable_victim()) {
      if (metrics_) metrics_->disable_refused = true;
      trace("attack_aborted", {{"reason", "victim_protected"}});
      return;
    }
    state_.victim_disabled = true;
  } else if (cfg_.mode == AttackMode::ImpostorJam) {
    state_.jammer_active = true;
    if (cfg_.jammer.kind == JammerKind::Constant) {
      ether_->add_jam_burst(cfg_.jammer_node, cfg_.channel_mhz, sv_.now(),
                            std::numeric_limits<double>::infinity());
      if (metrics_) ++metrics_->jam_bursts;
      trace("jam_burst", {{"kind", "constant"}});
    }
  }

  state_.active = true;
  if (cfg_.ack_spoof && metrics_) metrics_->final_phase = to_string(state_.phase);
  if (cfg_.impostor) {
    impostor_active_ = true;
    keepalive();
  }
  trace("attacker_active", {{"mode", to_string(cfg_.mode)},
                            {"impostor", impostor_active_},
                            {"ack_spoof", cfg_.ack_spoof}});
}

void Attacker::keepalive() {
  if (!impostor_active_) return;
  codec::Datagram d;
  d.token.value = rng_.next_u16();
  d.kind = codec::DatagramKind::PullData;
  d.eui = *state_.stolen_eui;
  if (metrics_) ++metrics_->pulls_sent;
  sv_.send_dgram(cfg_.addr, cfg_.server_addr, codec::encode_datagram(d));

  double mean = cfg_.pull_interval_ms / cfg_.pull_flood_factor;
  double wait = cfg_.pull_jitter == nodes::PullJitter::Exponential ? rng_.exponential(mean)
                                                                   : mean;
  sv_.schedule_at(sv_.now() + wait, [this] { keepalive(); });
}

void Attacker::stop_jamming() {
  if (!state_.jammer_active) return;
  state_.jammer_active = false;
  ether_->end_bursts(cfg_.jammer_node, sv_.now());
  trace("jammer_stopped", {});
}

void Attacker::on_frame_start(const radio::RadioFrame& f) {
  if (!state_.jammer_active) return;
  if (f.payload.empty() || f.channel_mhz != cfg_.channel_mhz) return;
  // Scanning targets uplink traffic; downlinks from gateways are left alone.
  std::uint8_t mhdr = f.payload[0];
  if (mhdr != mac::kMhdrConfirmedUp && mhdr != mac::kMhdrUnconfirmedUp) return;

  switch (cfg_.jammer.kind) {
    case JammerKind::Constant:
      return; // the standing burst covers everything
    case JammerKind::Triggered: {
      if (!ether_->adjacent(f.source, cfg_.jammer_node)) return;
      ether_->add_jam_burst(cfg_.jammer_node, f.channel_mhz,
                            f.start + cfg_.jammer.detect_latency_ms, f.end());
      if (metrics_) ++metrics_->jam_bursts;
      trace("jam_burst", {{"kind", "triggered"}, {"frame", f.seq}});
      return;
    }
    case JammerKind::Selective: {
      if (!ether_->adjacent(f.source, cfg_.jammer_node)) return;
      if (f.payload.size() < 5) return;
      mac::DevAddr dev;
      std::copy(f.payload.begin() + 1, f.payload.begin() + 5, dev.bytes.begin());
      if (!is_target(dev)) return;
      double jam_at = f.start + cfg_.jammer.header_scan_fraction * f.airtime +
                      cfg_.jammer.trigger_latency_ms;
      if (jam_at >= f.end()) {
        if (metrics_) ++metrics_->triggers_too_late;
        trace("jam_trigger_late", {{"kind", "selective"}, {"frame", f.seq}});
        return;
      }
      ether_->add_jam_burst(cfg_.jammer_node, f.channel_mhz, jam_at, f.end());
      if (metrics_) ++metrics_->jam_bursts;
      trace("jam_burst", {{"kind", "selective"}, {"frame", f.seq}});
      return;
    }
    case JammerKind::Wormhole: {
      // The rogue gateway is the scanning/recording device.
      if (!ether_->adjacent(f.source, cfg_.gw_node)) return;
      if (f.payload.size() < 5) return;
      mac::DevAddr dev;
      std::copy(f.payload.begin() + 1, f.payload.begin() + 5, dev.bytes.begin());
      if (!is_target(dev)) return;
      double tail = cfg_.jammer.record_tail_fraction * f.airtime;
      double record_done = f.end() - tail;
      std::uint64_t seq = f.seq;
      double frame_end = f.end();
      double channel = f.channel_mhz;
      sv_.schedule_at(record_done, [this, seq, frame_end, channel] {
        if (!state_.jammer_active) return;
        // Trigger only after the recording succeeded; a corrupted recording
        // means no trigger. Resolving here memoizes the outcome the rogue
        // gateway will observe at end-of-airtime.
        auto out = ether_->resolve(seq, cfg_.gw_node);
        if (!out.crc_ok || out.lost) {
          if (metrics_) ++metrics_->recordings_corrupt;
          trace("record_corrupt_no_trigger", {{"frame", seq}});
          return;
        }
        double jam_at = sv_.now() + cfg_.jammer.trigger_latency_ms;
        if (jam_at >= frame_end) {
          if (metrics_) ++metrics_->triggers_too_late;
          trace("jam_trigger_late", {{"kind", "wormhole"}, {"frame", seq}});
          return;
        }
        ether_->add_jam_burst(cfg_.jammer_node, channel, jam_at, frame_end);
        if (metrics_) ++metrics_->jam_bursts;
        trace("jam_burst", {{"kind", "wormhole"}, {"frame", seq}});
      });
      return;
    }
  }
}

void Attacker::on_reception(const radio::Reception& r) {
  if (!impostor_active_) return;

  auto frame = mac::parse_frame(r.frame.payload);
  if (frame && frame->is_uplink()) {
    auto it = last_seen_up_fcnt_.find(frame->dev_addr);
    if (it == last_seen_up_fcnt_.end() || frame->fcnt > it->second)
      last_seen_up_fcnt_[frame->dev_addr] = frame->fcnt;
  }

  // Corrupt recordings are dropped: the impostor only ever presents clean
  // traffic under the stolen identifier.
  if (!r.crc_ok) {
    trace("atk_drop_corrupt", {});
    return;
  }

  if (cfg_.ack_spoof && state_.phase == AckSpoofPhase::Withholding && frame &&
      frame->is_confirmed_uplink() && state_.target_dev &&
      frame->dev_addr == *state_.target_dev && frame->fcnt > state_.withheld_for_fcnt) {
    // The device moved on: its retransmissions are exhausted. Drop this
    // uplink and answer it with the recorded ACK instead.
    state_.dropped_fcnt = frame->fcnt;
    if (metrics_) ++metrics_->suppressed_uplinks;
    trace("atk_suppress_uplink", {{"fcnt", frame->fcnt}});
    set_phase(AckSpoofPhase::Replaying);
    schedule_replay();
    return;
  }

  forward(r);
}

void Attacker::forward(const radio::Reception& r) {
  codec::RxPacketMeta meta;
  meta.stat = 1;
  meta.freq_mhz = r.frame.channel_mhz;
  meta.sf = r.frame.sf;
  meta.data = base64_encode(r.frame.payload);
  meta.size = r.frame.payload.size();

  codec::Datagram d;
  d.token.value = rng_.next_u16();
  d.kind = codec::DatagramKind::PushData;
  d.eui = *state_.stolen_eui;
  d.body = codec::encode_rxpk({meta});
  if (metrics_) ++metrics_->forwarded_pushes;
  Bytes raw = codec::encode_datagram(d);
  sv_.schedule_at(sv_.now() + cfg_.forward_latency_ms,
                  [this, raw] { sv_.send_dgram(cfg_.addr, cfg_.server_addr, raw); });
}

void Attacker::schedule_replay() {
  // Land the recorded ACK mid-RX1 of the uplink that was just suppressed.
  double airtime =
      radio::airtime_ms(state_.recorded_sf, state_.recorded_ack->size(), cfg_.base_airtime_ms);
  double at = sv_.now() + cfg_.rx.rx1_delay_ms + cfg_.rx.width_ms / 2 - airtime;
  double replay_airtime = airtime;
  sv_.schedule_at(at, [this, replay_airtime] {
    if (metrics_) ++metrics_->replays;
    trace("atk_replay", {{"withheld_for", state_.withheld_for_fcnt},
                         {"dropped", state_.dropped_fcnt}});
    sv_.transmit(*state_.recorded_ack, state_.recorded_sf, state_.recorded_freq, cfg_.gw_node);
    // done once the device has had its chance to accept or reject the replay
    sv_.schedule_at(sv_.now() + replay_airtime, [this] { set_phase(AckSpoofPhase::Done); });
  });
}

void Attacker::on_datagram(const Bytes& raw) {
  auto res = codec::decode_datagram(raw);
  if (!res.ok()) return;
  const codec::Datagram& d = *res.datagram;
  if (d.kind != codec::DatagramKind::PullResp) return; // PUSH_ACK / PULL_ACK ignored
  auto parsed = codec::parse_txpk(d.body);
  if (!parsed.ok()) return;
  auto payload = base64_decode(parsed.packet->data);
  auto frame = payload ? mac::parse_frame(*payload) : std::nullopt;

  bool withhold = false;
  if (cfg_.ack_spoof && frame && frame->is_downlink() && frame->ack_flag()) {
    if (state_.phase == AckSpoofPhase::AwaitTarget) {
      // First ACK through this path: lock onto the device and hold it back.
      state_.target_dev = frame->dev_addr;
      state_.recorded_ack = *payload;
      state_.recorded_sf = parsed.packet->sf;
      state_.recorded_freq = parsed.packet->freq_mhz;
      auto it = last_seen_up_fcnt_.find(frame->dev_addr);
      state_.withheld_for_fcnt = it != last_seen_up_fcnt_.end() ? it->second : 0;
      set_phase(AckSpoofPhase::Withholding);
      withhold = true;
    } else if (state_.phase == AckSpoofPhase::Withholding && state_.target_dev &&
               frame->dev_addr == *state_.target_dev) {
      withhold = true;
    }
  }

  if (withhold) {
    if (metrics_) ++metrics_->withheld_acks;
    trace("atk_withhold_ack", {{"down_fcnt", frame->fcnt}});
  } else {
    // Relay the downlink like a well-behaved gateway.
    sv_.transmit(*payload, parsed.packet->sf, parsed.packet->freq_mhz, cfg_.gw_node);
  }

  // TX_ACK either way, so the server-side view stays healthy.
  codec::Datagram ack;
  ack.token = d.token;
  ack.kind = codec::DatagramKind::TxAck;
  ack.eui = state_.stolen_eui ? *state_.stolen_eui : codec::GatewayEui{};
  sv_.send_dgram(cfg_.addr, cfg_.server_addr, codec::encode_datagram(ack));
}

} // namespace lorasim::attacks
