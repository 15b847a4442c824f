#include "lorasim/nodes.hpp"

#include <algorithm>

namespace lorasim::nodes {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Registry

bool Registry::add(RegistryEntry entry) {
  if (entries_.count(entry.eui)) return false;
  if (entry.name.empty()) entry.name = entry.eui.to_string();
  entries_.emplace(entry.eui, std::move(entry));
  return true;
}

const RegistryEntry* Registry::find(const codec::GatewayEui& eui) const {
  auto it = entries_.find(eui);
  return it == entries_.end() ? nullptr : &it->second;
}

void Registry::touch(const codec::GatewayEui& eui, double t) {
  auto it = entries_.find(eui);
  if (it != entries_.end()) it->second.last_seen = t;
}

std::string Registry::export_json() const {
  json arr = json::array();
  for (const auto& [eui, e] : entries_) {
    arr.push_back({{"id", e.name},
                   {"description", e.trusted ? "registered gateway" : "untrusted gateway"},
                   {"location", e.location},
                   {"last-seen", e.last_seen}});
  }
  json doc;
  doc["gateways"] = std::move(arr);
  return doc.dump(2);
}

// ---------------------------------------------------------------------------
// End device

EndDevice::EndDevice(NodeServices services, DeviceConfig cfg, sim::DeviceMetrics* metrics)
    : sv_(std::move(services)), cfg_(std::move(cfg)), metrics_(metrics) {
  if (metrics_) metrics_->sf = cfg_.sf;
}

void EndDevice::trace(const char* ev, json fields) {
  if (!sv_.trace) return;
  fields["node"] = cfg_.id;
  sv_.trace->event(sv_.now(), ev, std::move(fields));
}

bool EndDevice::send_confirmed() {
  if (pending_) return false;
  std::uint16_t fcnt = fcnt_up_++;
  Bytes payload(cfg_.payload_len);
  for (std::size_t i = 0; i < payload.size(); ++i)
    payload[i] = static_cast<std::uint8_t>((fcnt + i) & 0xff);
  mac::MacFrame f =
      mac::build_uplink(cfg_.key, cfg_.dev_addr, true, fcnt, std::move(payload), cfg_.mic_mode);
  pending_ = Pending{mac::serialize_frame(f), fcnt, 0, 0, next_serial_++};
  log_.push_back(UplinkRecord{fcnt, UplinkRecord::Outcome::InFlight, 0, false, 0, -1});
  if (metrics_) ++metrics_->uplinks_sent;
  trace("dev_uplink", {{"fcnt", fcnt}, {"confirmed", true}});
  transmit_attempt();
  return true;
}

void EndDevice::send_unconfirmed() {
  std::uint16_t fcnt = fcnt_up_++;
  Bytes payload(cfg_.payload_len);
  for (std::size_t i = 0; i < payload.size(); ++i)
    payload[i] = static_cast<std::uint8_t>((fcnt + i) & 0xff);
  mac::MacFrame f =
      mac::build_uplink(cfg_.key, cfg_.dev_addr, false, fcnt, std::move(payload), cfg_.mic_mode);
  if (metrics_) ++metrics_->uplinks_sent;
  trace("dev_uplink", {{"fcnt", fcnt}, {"confirmed", false}});
  sv_.transmit(mac::serialize_frame(f), cfg_.sf, cfg_.channel_mhz, cfg_.node);
}

void EndDevice::transmit_attempt() {
  SimTime airtime =
      radio::airtime_ms(cfg_.sf, pending_->frame_bytes.size(), cfg_.base_airtime_ms);
  pending_->last_tx_end = sv_.now() + airtime;
  std::uint64_t serial = pending_->serial;
  int attempt = pending_->attempts;
  sv_.transmit(pending_->frame_bytes, cfg_.sf, cfg_.channel_mhz, cfg_.node);
  // Window bookkeeping is implicit; this event decides retransmit-or-give-up.
  sv_.schedule_at(pending_->last_tx_end + cfg_.rx.rx2_delay_ms + cfg_.rx.width_ms,
                  [this, serial, attempt] { on_rx2_close(serial, attempt); });
}

void EndDevice::on_rx2_close(std::uint64_t serial, int attempt) {
  if (!pending_ || pending_->serial != serial || pending_->attempts != attempt)
    return; // resolved or superseded
  if (pending_->attempts < cfg_.retransmit_limit) {
    ++pending_->attempts;
    log_.back().attempts = pending_->attempts;
    if (metrics_) ++metrics_->retransmissions;
    trace("dev_retransmit", {{"fcnt", pending_->fcnt}, {"attempt", pending_->attempts}});
    transmit_attempt();
    return;
  }
  log_.back().outcome = UplinkRecord::Outcome::PresumedLost;
  log_.back().resolved_at = sv_.now();
  if (metrics_) ++metrics_->presumed_lost;
  trace("dev_presumed_lost", {{"fcnt", pending_->fcnt}});
  pending_.reset();
}

bool EndDevice::in_window(SimTime t) const {
  SimTime end = pending_->last_tx_end;
  SimTime rx1 = end + cfg_.rx.rx1_delay_ms;
  SimTime rx2 = end + cfg_.rx.rx2_delay_ms;
  return (t >= rx1 && t < rx1 + cfg_.rx.width_ms) || (t >= rx2 && t < rx2 + cfg_.rx.width_ms);
}

void EndDevice::on_reception(const radio::Reception& r) {
  if (!r.crc_ok) return;
  auto frame = mac::parse_frame(r.frame.payload);
  if (!frame || frame->dev_addr != cfg_.dev_addr || !frame->is_downlink()) return;
  if (!pending_) {
    trace("dev_downlink_ignored", {{"reason", "no_pending"}, {"fcnt", frame->fcnt}});
    return;
  }
  if (!in_window(sv_.now())) {
    trace("dev_downlink_ignored", {{"reason", "outside_window"}, {"fcnt", frame->fcnt}});
    return;
  }
  auto result =
      mac::verify_ack(cfg_.key, *frame, last_down_fcnt_, cfg_.mic_mode, pending_->fcnt);
  switch (result) {
    case mac::VerifyResult::Accepted: {
      bool genuine = classify_ack ? classify_ack(cfg_.dev_addr, frame->fcnt, pending_->fcnt)
                                  : true;
      log_.back().outcome = UplinkRecord::Outcome::Acked;
      log_.back().spoofed = !genuine;
      log_.back().ack_down_fcnt = frame->fcnt;
      log_.back().resolved_at = sv_.now();
      last_down_fcnt_ = frame->fcnt;
      if (metrics_) {
        if (genuine)
          ++metrics_->acked_genuine;
        else
          ++metrics_->acked_spoofed;
      }
      trace("dev_acked", {{"fcnt", pending_->fcnt},
                          {"down_fcnt", frame->fcnt},
                          {"genuine", genuine}});
      pending_.reset();
      break;
    }
    case mac::VerifyResult::RejectedCounter:
      if (metrics_) ++metrics_->rejected_counter;
      trace("dev_ack_rejected", {{"reason", "counter"}, {"down_fcnt", frame->fcnt}});
      break;
    case mac::VerifyResult::RejectedMic:
      if (metrics_) ++metrics_->rejected_mic;
      trace("dev_ack_rejected", {{"reason", "mic"}, {"down_fcnt", frame->fcnt}});
      break;
  }
}

// ---------------------------------------------------------------------------
// Gateway

Gateway::Gateway(NodeServices services, GatewayConfig cfg, Rng rng, sim::GatewayMetrics* metrics)
    : sv_(std::move(services)), cfg_(std::move(cfg)), rng_(std::move(rng)), metrics_(metrics) {
  if (metrics_) metrics_->eui = cfg_.eui.to_string();
}

void Gateway::start() {
  sv_.schedule_at(cfg_.first_pull_ms, [this] { keepalive(); });
}

void Gateway::set_alive(bool alive) {
  if (alive_ == alive) return;
  alive_ = alive;
  if (sv_.trace)
    sv_.trace->event(sv_.now(), "gw_alive", {{"node", cfg_.id}, {"alive", alive}});
}

void Gateway::keepalive() {
  if (!alive_) return; // dead gateways stop pulling; no reschedule
  codec::Datagram d;
  d.token.value = rng_.next_u16();
  d.kind = codec::DatagramKind::PullData;
  d.eui = cfg_.eui;
  if (metrics_) ++metrics_->pulls_sent;
  sv_.send_dgram(cfg_.addr, cfg_.server_addr, codec::encode_datagram(d));
  double wait = cfg_.pull_jitter == PullJitter::Exponential
                    ? rng_.exponential(cfg_.pull_interval_ms)
                    : cfg_.pull_interval_ms;
  sv_.schedule_at(sv_.now() + wait, [this] { keepalive(); });
}

std::optional<codec::Datagram> Gateway::on_radio_rx(const radio::Reception& r) {
  if (!alive_) return std::nullopt;
  if (metrics_) {
    ++metrics_->receptions;
    if (!r.crc_ok) ++metrics_->receptions_crc_failed;
  }
  int stat = r.crc_ok ? 1 : -1;
  if (!r.crc_ok && cfg_.crc_policy == CrcForwardPolicy::Drop) {
    if (sv_.trace)
      sv_.trace->event(sv_.now(), "gw_drop_crc", {{"node", cfg_.id}});
    return std::nullopt;
  }

  codec::RxPacketMeta meta;
  meta.stat = stat;
  meta.freq_mhz = r.frame.channel_mhz;
  meta.sf = r.frame.sf;
  meta.data = base64_encode(r.frame.payload);
  meta.size = r.frame.payload.size();

  codec::Datagram d;
  d.token.value = rng_.next_u16();
  d.kind = codec::DatagramKind::PushData;
  d.eui = cfg_.eui;
  d.body = codec::encode_rxpk({meta});
  if (metrics_) {
    ++metrics_->pushes;
    if (stat == -1) ++metrics_->pushes_stat_corrupt;
  }
  Bytes raw = codec::encode_datagram(d);
  if (cfg_.forward_latency_ms > 0) {
    sv_.schedule_at(sv_.now() + cfg_.forward_latency_ms,
                    [this, raw] { sv_.send_dgram(cfg_.addr, cfg_.server_addr, raw); });
  } else {
    sv_.send_dgram(cfg_.addr, cfg_.server_addr, raw);
  }
  return d;
}

void Gateway::on_datagram(const Bytes& raw) {
  if (!alive_) return;
  auto res = codec::decode_datagram(raw);
  if (!res.ok()) return;
  const codec::Datagram& d = *res.datagram;
  switch (d.kind) {
    case codec::DatagramKind::PushAck:
    case codec::DatagramKind::PullAck:
      return; // quality measurement only
    case codec::DatagramKind::PullResp: {
      auto parsed = codec::parse_txpk(d.body);
      if (!parsed.ok()) return;
      if (metrics_) ++metrics_->pull_resps;
      auto payload = base64_decode(parsed.packet->data);
      sv_.transmit(*payload, parsed.packet->sf, parsed.packet->freq_mhz, cfg_.node);

      codec::Datagram ack;
      ack.token = d.token; // TX_ACK echoes the PULL_RESP token
      ack.kind = codec::DatagramKind::TxAck;
      ack.eui = cfg_.eui;
      if (metrics_) ++metrics_->tx_acks_sent;
      sv_.send_dgram(cfg_.addr, cfg_.server_addr, codec::encode_datagram(ack));
      return;
    }
    default:
      return;
  }
}

// ---------------------------------------------------------------------------
// Server

const char* to_string(RoutePolicy p) {
  switch (p) {
    case RoutePolicy::LastPullWins: return "last_pull_wins";
    case RoutePolicy::StickyFirst: return "sticky_first";
    case RoutePolicy::MostFrequent: return "most_frequent";
  }
  return "?";
}

std::optional<RoutePolicy> route_policy_from_string(std::string_view s) {
  if (s == "last_pull_wins") return RoutePolicy::LastPullWins;
  if (s == "sticky_first") return RoutePolicy::StickyFirst;
  if (s == "most_frequent") return RoutePolicy::MostFrequent;
  return std::nullopt;
}

Server::Server(NodeServices services, ServerConfig cfg, Registry* registry, Rng rng,
               sim::ServerMetrics* metrics)
    : sv_(std::move(services)),
      cfg_(std::move(cfg)),
      registry_(registry),
      rng_(std::move(rng)),
      metrics_(metrics) {}

void Server::add_device(const mac::DevAddr& addr, const mac::NwkSKey& key) {
  keys_[addr] = key;
}

void Server::trace(const char* ev, json fields) {
  if (sv_.trace) sv_.trace->event(sv_.now(), ev, std::move(fields));
}

void Server::start() {
  if (cfg_.probe_interval_ms > 0)
    sv_.schedule_at(cfg_.probe_start_ms, [this] { probe_tick(); });
}

void Server::probe_tick() {
  // Dummy routed downlink to a reserved DevAddr; devices ignore it.
  mac::DevAddr probe_addr;
  probe_addr.bytes = {0xff, 0xff, 0xff, 0xff};
  mac::NwkSKey probe_key{}; // nobody verifies probes
  for (const auto& eui : cfg_.probe_euis) {
    mac::MacFrame f;
    f.mhdr = mac::kMhdrUnconfirmedDown;
    f.dev_addr = probe_addr;
    f.fcnt = probe_fcnt_++;
    f.mic = mac::compute_mic(probe_key, f, mac::Direction::Down, mac::MicMode::V1_0,
                             std::nullopt);
    if (metrics_) ++metrics_->probe_downlinks;
    send_downlink(eui, f, cfg_.probe_sf);
  }
  double wait = cfg_.probe_interval_ms;
  if (cfg_.probe_jitter) wait *= rng_.uniform(0.5, 1.5);
  sv_.schedule_at(sv_.now() + wait, [this] { probe_tick(); });
}

void Server::on_datagram(const std::string& from_addr, const LinkAttrs& link, const Bytes& raw) {
  if (cfg_.require_authenticated_link && !link.authenticated) {
    // Discarded before any state change; the IDS never sees it either.
    if (metrics_) ++metrics_->unauthenticated_dropped;
    trace("srv_unauth_drop", {{"from", from_addr}});
    return;
  }
  auto res = codec::decode_datagram(raw);
  if (!res.ok()) {
    if (metrics_) ++metrics_->undecodable_bodies;
    trace("srv_undecodable", {{"from", from_addr}, {"error", codec::to_string(res.error)}});
    return;
  }
  const codec::Datagram& d = *res.datagram;
  switch (d.kind) {
    case codec::DatagramKind::PushData:
      handle_push_data(d, from_addr);
      break;
    case codec::DatagramKind::PullData:
      handle_pull_data(d, from_addr);
      break;
    case codec::DatagramKind::TxAck:
      if (observe)
        observe(ids::Observation{sv_.now(), d.eui, from_addr, d.kind, std::nullopt});
      break;
    default:
      break; // PUSH_ACK / PULL_ACK / PULL_RESP are not server-bound
  }
}

void Server::handle_push_data(const codec::Datagram& d, const std::string& from) {
  if (metrics_) ++metrics_->push_data;

  codec::Datagram ack;
  ack.token = d.token;
  ack.kind = codec::DatagramKind::PushAck;
  sv_.send_dgram(cfg_.addr, from, codec::encode_datagram(ack));

  const RegistryEntry* entry = registry_ ? registry_->find(d.eui) : nullptr;
  bool trusted = entry && entry->trusted;
  if (registry_ && entry) registry_->touch(d.eui, sv_.now());
  if (!trusted) {
    if (metrics_) ++metrics_->untrusted_datagrams;
    trace("srv_untrusted", {{"eui", d.eui.to_string()}, {"from", from}});
  }

  auto parsed = codec::parse_rxpk(d.body);
  if (!parsed.ok()) {
    if (metrics_) ++metrics_->undecodable_bodies;
    if (observe)
      observe(ids::Observation{sv_.now(), d.eui, from, d.kind, std::nullopt});
    return;
  }

  for (const auto& pkt : *parsed.packets) {
    if (observe)
      observe(ids::Observation{sv_.now(), d.eui, from, d.kind, pkt.stat});
    if (metrics_) {
      ++metrics_->copies_total;
      if (pkt.stat == -1) ++metrics_->copies_corrupt;
      if (cfg_.attack_start_ms >= 0 && sv_.now() >= cfg_.attack_start_ms) {
        ++metrics_->copies_total_attack;
        if (pkt.stat == -1) ++metrics_->copies_corrupt_attack;
      }
    }
    if (pkt.stat == -1) {
      trace("srv_corrupt_copy", {{"eui", d.eui.to_string()}, {"from", from}});
      continue; // checksum failed at the gateway; nothing to process
    }
    if (pkt.stat != 1) continue;
    if (cfg_.require_registration && !trusted) continue; // observed, not processed

    auto frame_bytes = base64_decode(pkt.data);
    if (!frame_bytes) continue;
    auto frame = mac::parse_frame(*frame_bytes);
    if (!frame || !frame->is_uplink()) continue;

    auto key = std::make_pair(frame->dev_addr, frame->fcnt);
    if (dedup_.count(key)) {
      if (metrics_) ++metrics_->duplicates_dropped;
      trace("srv_duplicate", {{"dev", frame->dev_addr.hex()}, {"fcnt", frame->fcnt}});
      continue;
    }
    dedup_.insert(key);
    if (metrics_) ++metrics_->uplinks_accepted;
    if (on_uplink_accepted) on_uplink_accepted(frame->dev_addr, frame->fcnt);
    trace("srv_accept",
          {{"dev", frame->dev_addr.hex()}, {"fcnt", frame->fcnt}, {"via", from}});

    if (frame->is_confirmed_uplink() && trusted && keys_.count(frame->dev_addr)) {
      // Downlink counter is consumed per generated ACK.
      std::uint16_t down = ++down_fcnt_[frame->dev_addr];
      mac::MacFrame ackf = mac::build_ack(keys_[frame->dev_addr], frame->dev_addr, down,
                                          cfg_.mic_mode, frame->fcnt);
      ack_truth_[{frame->dev_addr, down}] = frame->fcnt;
      if (metrics_) ++metrics_->acks_sent;

      // Dispatch so the gateway's transmission lands mid-RX1 at the device.
      double ack_airtime =
          radio::airtime_ms(pkt.sf, mac::kFrameOverhead, cfg_.base_airtime_ms);
      double at = sv_.now() + cfg_.rx.rx1_delay_ms + cfg_.rx.width_ms / 2 - ack_airtime;
      codec::GatewayEui eui = d.eui;
      int sf = pkt.sf;
      trace("srv_ack_scheduled", {{"dev", frame->dev_addr.hex()},
                                  {"down_fcnt", down},
                                  {"acked_fcnt", frame->fcnt},
                                  {"at", at}});
      sv_.schedule_at(at, [this, eui, ackf, sf] { send_downlink(eui, ackf, sf); });
    }
  }
}

void Server::handle_pull_data(const codec::Datagram& d, const std::string& from) {
  if (metrics_) ++metrics_->pull_data;

  codec::Datagram ack;
  ack.token = d.token;
  ack.kind = codec::DatagramKind::PullAck;
  sv_.send_dgram(cfg_.addr, from, codec::encode_datagram(ack));

  if (registry_) registry_->touch(d.eui, sv_.now());
  if (observe)
    observe(ids::Observation{sv_.now(), d.eui, from, d.kind, std::nullopt});
  update_route(d.eui, from);
}

void Server::update_route(const codec::GatewayEui& eui, const std::string& from) {
  RouteState& r = routes_[eui];
  double now = sv_.now();
  r.last_pull = now;
  if (r.first_addr.empty()) r.first_addr = from;

  auto& times = r.arrivals[from];
  times.push_back(now);
  double cutoff = now - cfg_.most_frequent_window_ms;
  for (auto it = r.arrivals.begin(); it != r.arrivals.end();) {
    auto& dq = it->second;
    while (!dq.empty() && dq.front() < cutoff) dq.pop_front();
    if (dq.empty() && it->first != from)
      it = r.arrivals.erase(it);
    else
      ++it;
  }

  std::string chosen = r.addr;
  switch (cfg_.route_policy) {
    case RoutePolicy::LastPullWins:
      chosen = from;
      break;
    case RoutePolicy::StickyFirst:
      chosen = r.first_addr;
      break;
    case RoutePolicy::MostFrequent: {
      std::size_t best = 0;
      double best_recent = -1;
      for (const auto& [addr, dq] : r.arrivals) {
        if (dq.empty()) continue;
        // ties break to the most recent arrival
        if (dq.size() > best || (dq.size() == best && dq.back() > best_recent)) {
          best = dq.size();
          best_recent = dq.back();
          chosen = addr;
        }
      }
      break;
    }
  }
  if (chosen != r.addr) {
    trace("srv_route_change",
          {{"eui", eui.to_string()}, {"from", r.addr}, {"to", chosen}});
    r.addr = chosen;
  }
}

std::optional<std::string> Server::route_for(const codec::GatewayEui& eui) const {
  auto it = routes_.find(eui);
  if (it == routes_.end() || it->second.addr.empty()) return std::nullopt;
  return it->second.addr;
}

bool Server::uplink_accepted(const mac::DevAddr& dev, std::uint16_t fcnt) const {
  return dedup_.count({dev, fcnt}) > 0;
}

std::optional<std::uint16_t> Server::acked_uplink_for(const mac::DevAddr& dev,
                                                      std::uint16_t down_fcnt) const {
  auto it = ack_truth_.find({dev, down_fcnt});
  if (it == ack_truth_.end()) return std::nullopt;
  return it->second;
}

void Server::send_downlink(const codec::GatewayEui& eui, const mac::MacFrame& frame, int sf) {
  auto route = route_for(eui);
  if (!route) {
    if (metrics_) ++metrics_->downlinks_dropped_no_route;
    trace("srv_downlink_dropped", {{"eui", eui.to_string()}, {"reason", "no_route"}});
    return;
  }
  Bytes bytes = mac::serialize_frame(frame);
  codec::TxPacketMeta meta;
  meta.freq_mhz = cfg_.channel_mhz;
  meta.sf = sf;
  meta.size = bytes.size();
  meta.data = base64_encode(bytes);

  codec::Datagram d;
  d.token.value = rng_.next_u16();
  d.kind = codec::DatagramKind::PullResp;
  d.body = codec::encode_txpk(meta);
  if (metrics_) {
    ++metrics_->downlinks_sent;
    ++metrics_->downlinks_by_address[*route];
    if (sv_.now() >= cfg_.measure_start_ms) ++metrics_->downlinks_by_address_measured[*route];
  }
  trace("srv_downlink", {{"eui", eui.to_string()}, {"to", *route}, {"fcnt", frame.fcnt}});
  sv_.send_dgram(cfg_.addr, *route, codec::encode_datagram(d));
}

} // namespace lorasim::nodes
