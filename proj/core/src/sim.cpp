#include "lorasim/sim.hpp"

#include <filesystem>
#include <fstream>

namespace lorasim::sim {

using nlohmann::json;

Simulation::Simulation(const Scenario& scenario, TraceWriter* trace)
    : scn_(scenario), trace_(trace ? trace : &null_trace_), master_(scenario.seed) {
  validate(scn_);
  wire();
  schedule_drivers();
}

void Simulation::wire() {
  metrics_.scenario = scn_.name;
  metrics_.seed = scn_.seed;
  metrics_.horizon_ms = scn_.horizon_ms;

  node_names_ = node_ids(scn_);
  for (std::size_t i = 0; i < node_names_.size(); ++i)
    node_index_[node_names_[i]] = static_cast<int>(i);

  radio::ChannelModel model = scn_.channel;
  ether_ = std::make_unique<radio::Ether>(queue_, model, master_.fork("ether"));
  ether_->set_node_count(static_cast<int>(node_names_.size()));
  for (const auto& [a, b] : scn_.adjacency)
    ether_->add_adjacency(node_index_.at(a), node_index_.at(b));

  for (const auto& g : scn_.gateways) {
    if (!g.cfg.registered) continue;
    nodes::RegistryEntry e;
    e.eui = g.cfg.eui;
    e.location = g.location;
    e.trusted = true;
    registry_.add(e);
  }

  nodes::NodeServices sv;
  sv.now = [this] { return queue_.now(); };
  sv.schedule_at = [this](SimTime at, std::function<void()> fn) {
    queue_.at(at, std::move(fn));
  };
  sv.send_dgram = [this](const std::string& from, const std::string& to, Bytes bytes) {
    send_dgram(from, to, std::move(bytes));
  };
  sv.transmit = [this](Bytes payload, int sf, double channel, int node) {
    ether_->transmit(std::move(payload), sf, channel, node);
  };
  sv.trace = trace_;

  for (std::size_t i = 0; i < scn_.devices.size(); ++i) {
    const DeviceSpec& spec = scn_.devices[i];
    nodes::DeviceConfig dc = spec.cfg;
    dc.node = node_index_.at(dc.id);
    dc.mic_mode = scn_.mic_mode;
    dc.rx = scn_.rx;
    dc.channel_mhz = scn_.channel_mhz;
    dc.base_airtime_ms = scn_.channel.base_airtime_ms;
    devaddr_to_id_[dc.dev_addr.hex()] = dc.id;
    auto* m = &metrics_.devices[dc.id];
    auto dev = std::make_unique<nodes::EndDevice>(sv, dc, m);
    dev->classify_ack = [this](const mac::DevAddr& dev_addr, std::uint16_t down_fcnt,
                               std::uint16_t pending_fcnt) {
      auto truth = server_->acked_uplink_for(dev_addr, down_fcnt);
      return truth.has_value() && *truth == pending_fcnt;
    };
    node_to_device_[dc.node] = i;
    devices_.push_back(std::move(dev));
  }

  for (std::size_t i = 0; i < scn_.gateways.size(); ++i) {
    const GatewaySpec& spec = scn_.gateways[i];
    nodes::GatewayConfig gc = spec.cfg;
    gc.node = node_index_.at(gc.id);
    gc.server_addr = scn_.server.addr;
    auto* m = &metrics_.gateways[gc.id];
    m->sf_label = spec.sf_label;
    addr_to_gateway_[gc.addr] = i;
    node_to_gateway_[gc.node] = i;
    gateways_.push_back(
        std::make_unique<nodes::Gateway>(sv, gc, master_.fork("gw:" + gc.id), m));
  }

  nodes::ServerConfig sc;
  sc.addr = scn_.server.addr;
  sc.require_registration = scn_.server.require_registration;
  sc.require_authenticated_link = scn_.server.require_authenticated_link;
  sc.route_policy = scn_.route_policy;
  sc.mic_mode = scn_.mic_mode;
  sc.rx = scn_.rx;
  sc.channel_mhz = scn_.channel_mhz;
  sc.base_airtime_ms = scn_.channel.base_airtime_ms;
  sc.probe_interval_ms = scn_.server.probe_interval_ms;
  sc.probe_start_ms = scn_.server.probe_start_ms;
  sc.probe_jitter = scn_.server.probe_jitter;
  sc.probe_sf = scn_.server.probe_sf;
  sc.measure_start_ms = scn_.server.measure_start_ms;
  for (const auto& gid : scn_.server.probe_gateway_ids)
    for (const auto& g : scn_.gateways)
      if (g.cfg.id == gid) sc.probe_euis.push_back(g.cfg.eui);
  for (const auto& a : scn_.attackers)
    if (a.cfg.mode != attacks::AttackMode::Idle)
      sc.attack_start_ms = sc.attack_start_ms < 0
                               ? a.cfg.attack_start_ms
                               : std::min(sc.attack_start_ms, a.cfg.attack_start_ms);
  server_ = std::make_unique<nodes::Server>(sv, sc, &registry_, master_.fork("server"),
                                            &metrics_.server);
  for (const auto& d : scn_.devices) server_->add_device(d.cfg.dev_addr, d.cfg.key);
  server_->on_uplink_accepted = [this](const mac::DevAddr& dev, std::uint16_t) {
    auto it = devaddr_to_id_.find(dev.hex());
    if (it != devaddr_to_id_.end()) ++metrics_.devices[it->second].delivered;
  };

  if (scn_.ids.enabled) {
    engine_ = std::make_unique<ids::DetectionEngine>(scn_.ids.cfg);
    server_->observe = [this](const ids::Observation& obs) {
      auto raised = engine_->observe(obs);
      for (const auto& a : raised) {
        alerts_.push_back(a);
        ++metrics_.ids.total;
        ++metrics_.ids.alerts_by_kind[ids::to_string(a.detector)];
        trace_->event(a.time, "alert",
                      {{"detector", ids::to_string(a.detector)},
                       {"eui", a.eui.to_string()},
                       {"severity", ids::to_string(a.severity)},
                       {"evidence", a.evidence}});
      }
    };
  }

  metrics_.has_attacker = !scn_.attackers.empty();
  for (std::size_t i = 0; i < scn_.attackers.size(); ++i) {
    const AttackerSpec& spec = scn_.attackers[i];
    attacks::AttackerConfig ac = spec.cfg;
    ac.gw_node = node_index_.at(ac.id + "-gw");
    ac.jammer_node = node_index_.at(ac.id + "-jam");
    ac.server_addr = scn_.server.addr;
    ac.channel_mhz = scn_.channel_mhz;
    ac.base_airtime_ms = scn_.channel.base_airtime_ms;
    ac.rx = scn_.rx;

    std::size_t target_idx = gateways_.size();
    for (std::size_t g = 0; g < scn_.gateways.size(); ++g)
      if (scn_.gateways[g].cfg.id == spec.target_gateway_id) target_idx = g;
    if (target_idx < gateways_.size())
      ac.pull_interval_ms = scn_.gateways[target_idx].cfg.pull_interval_ms;

    // Island sweeps share the one attacker metrics block; fields are
    // aggregates there, which is all the sweep reads.
    auto atk = std::make_unique<attacks::Attacker>(sv, ac, ether_.get(),
                                                   master_.fork("atk:" + ac.id),
                                                   &metrics_.attacker);
    if (target_idx < gateways_.size()) {
      nodes::Gateway* victim = gateways_[target_idx].get();
      atk->disable_victim = [this, victim] {
        if (victim->config().physically_protected) {
          trace_->event(queue_.now(), "disable_refused",
                        {{"gw", victim->config().id}, {"reason", "physically_protected"}});
          return false;
        }
        victim->set_alive(false);
        return true;
      };
      codec::GatewayEui victim_eui = victim->config().eui;
      bool registered = victim->config().registered;
      atk->lookup_victim_eui = [victim_eui, registered]() -> std::optional<codec::GatewayEui> {
        if (!registered) return std::nullopt;
        return victim_eui;
      };
    }
    addr_to_attacker_[ac.addr] = i;
    node_to_attacker_[ac.gw_node] = i;
    attackers_.push_back(std::move(atk));
  }

  ether_->deliver = [this](const radio::Reception& r) { dispatch_reception(r); };
  ether_->on_frame_start = [this](const radio::RadioFrame& f) {
    trace_->event(queue_.now(), "radio_tx",
                  {{"node", node_names_[static_cast<std::size_t>(f.source)]},
                   {"sf", f.sf},
                   {"len", f.payload.size()},
                   {"airtime", f.airtime},
                   {"frame", f.seq}});
    for (auto& a : attackers_) a->on_frame_start(f);
  };
}

void Simulation::schedule_drivers() {
  for (std::size_t i = 0; i < scn_.devices.size(); ++i)
    queue_.at(scn_.devices[i].first_uplink_ms, [this, i] { device_tick(i); });
  for (auto& g : gateways_) g->start();
  for (auto& a : attackers_) a->start();
  server_->start();
}

void Simulation::device_tick(std::size_t i) {
  nodes::EndDevice& dev = *devices_[i];
  if (dev.config().confirmed) {
    if (!dev.send_confirmed())
      trace_->event(queue_.now(), "dev_uplink_skip",
                    {{"node", dev.config().id}, {"reason", "busy"}});
  } else {
    dev.send_unconfirmed();
  }
  queue_.at(queue_.now() + scn_.devices[i].uplink_interval_ms, [this, i] { device_tick(i); });
}

void Simulation::dispatch_reception(const radio::Reception& r) {
  trace_->event(queue_.now(), "radio_rx",
                {{"node", node_names_[static_cast<std::size_t>(r.at)]},
                 {"from", node_names_[static_cast<std::size_t>(r.frame.source)]},
                 {"crc", r.crc_ok},
                 {"jam", r.jam_overlap},
                 {"frame", r.frame.seq}});
  if (auto it = node_to_device_.find(r.at); it != node_to_device_.end()) {
    devices_[it->second]->on_reception(r);
    return;
  }
  if (auto it = node_to_gateway_.find(r.at); it != node_to_gateway_.end()) {
    gateways_[it->second]->on_radio_rx(r);
    return;
  }
  if (auto it = node_to_attacker_.find(r.at); it != node_to_attacker_.end()) {
    attackers_[it->second]->on_reception(r);
    return;
  }
}

nodes::LinkAttrs Simulation::attrs_of(const std::string& addr) const {
  if (auto it = addr_to_gateway_.find(addr); it != addr_to_gateway_.end())
    return gateways_[it->second]->config().link;
  if (auto it = addr_to_attacker_.find(addr); it != addr_to_attacker_.end())
    return attackers_[it->second]->config().link;
  return nodes::LinkAttrs{};
}

void Simulation::send_dgram(const std::string& from, const std::string& to, Bytes bytes) {
  auto decoded = codec::decode_datagram(bytes);
  json fields{{"from", from}, {"to", to}, {"len", bytes.size()}};
  if (decoded.ok()) {
    fields["kind"] = codec::to_string(decoded.datagram->kind);
    fields["token"] = decoded.datagram->token.value;
    if (codec::kind_has_eui(decoded.datagram->kind))
      fields["eui"] = decoded.datagram->eui.to_string();
  }
  trace_->event(queue_.now(), "dgram", std::move(fields));

  // Eavesdroppable victim links leak to the attacker's sniffer.
  for (std::size_t i = 0; i < attackers_.size(); ++i) {
    const auto& spec = scn_.attackers[i];
    if (spec.target_gateway_id.empty()) continue;
    for (const auto& g : scn_.gateways) {
      if (g.cfg.id != spec.target_gateway_id || !g.cfg.link.eavesdroppable) continue;
      if (from == g.cfg.addr || to == g.cfg.addr) attackers_[i]->on_sniffed(bytes);
    }
  }

  queue_.at(queue_.now(), [this, from, to, bytes = std::move(bytes)] {
    if (to == scn_.server.addr) {
      server_->on_datagram(from, attrs_of(from), bytes);
      return;
    }
    if (auto it = addr_to_gateway_.find(to); it != addr_to_gateway_.end()) {
      gateways_[it->second]->on_datagram(bytes);
      return;
    }
    if (auto it = addr_to_attacker_.find(to); it != addr_to_attacker_.end()) {
      attackers_[it->second]->on_datagram(bytes);
      return;
    }
    trace_->event(queue_.now(), "dgram_undeliverable", {{"to", to}});
  });
}

void Simulation::finalize() {
  metrics_.events = static_cast<std::int64_t>(queue_.fired());
  for (auto& [id, g] : metrics_.gateways)
    g.corrupt_fraction =
        g.receptions ? static_cast<double>(g.receptions_crc_failed) /
                           static_cast<double>(g.receptions)
                     : 0.0;
  auto& sv = metrics_.server;
  sv.corrupt_fraction =
      sv.copies_total ? static_cast<double>(sv.copies_corrupt) /
                            static_cast<double>(sv.copies_total)
                      : 0.0;
  sv.corrupt_fraction_attack =
      sv.copies_total_attack ? static_cast<double>(sv.copies_corrupt_attack) /
                                   static_cast<double>(sv.copies_total_attack)
                             : 0.0;

  // Outcome inversion: an uplink the server holds but the device gave up on,
  // directly followed by one the device believes acknowledged that the server
  // never saw.
  for (std::size_t i = 0; i < devices_.size(); ++i) {
    const auto& dev = *devices_[i];
    const auto& log = dev.log();
    auto& dm = metrics_.devices[dev.config().id];
    for (std::size_t k = 0; k + 1 < log.size(); ++k) {
      if (log[k].outcome == nodes::UplinkRecord::Outcome::PresumedLost &&
          server_->uplink_accepted(dev.config().dev_addr, log[k].fcnt) &&
          log[k + 1].outcome == nodes::UplinkRecord::Outcome::Acked &&
          !server_->uplink_accepted(dev.config().dev_addr, log[k + 1].fcnt)) {
        dm.inversion_observed = true;
        trace_->event(queue_.now(), "inversion",
                      {{"node", dev.config().id},
                       {"lost_but_delivered", log[k].fcnt},
                       {"acked_but_lost", log[k + 1].fcnt}});
      }
    }
  }
}

RunResult Simulation::run() {
  trace_->event(0, "scenario_start",
                {{"scenario", scn_.name}, {"seed", scn_.seed}, {"horizon_ms", scn_.horizon_ms}});
  while (queue_.step(scn_.horizon_ms)) {
  }
  finalize();
  trace_->event(scn_.horizon_ms, "scenario_end", {{"events", metrics_.events}});
  return RunResult{metrics_, alerts_};
}

RunResult run_scenario(const Scenario& scenario, const std::string& out_dir) {
  if (out_dir.empty()) {
    Simulation sim(scenario);
    return sim.run();
  }
  std::filesystem::create_directories(out_dir);
  FileTraceWriter trace(out_dir + "/trace.jsonl");
  if (!trace.good())
    throw std::runtime_error("cannot write trace to '" + out_dir + "'");
  Simulation sim(scenario, &trace);
  RunResult res = sim.run();

  std::ofstream mf(out_dir + "/metrics.json");
  mf << res.metrics.to_json().dump(2) << '\n';
  std::ofstream cf(out_dir + "/summary.csv");
  cf << res.metrics.to_csv();
  std::ofstream af(out_dir + "/alerts.jsonl");
  for (const auto& a : res.alerts) {
    json line{{"time", a.time},
              {"detector", ids::to_string(a.detector)},
              {"eui", a.eui.to_string()},
              {"severity", ids::to_string(a.severity)},
              {"evidence", a.evidence}};
    af << line.dump() << '\n';
  }
  return res;
}

} // namespace lorasim::sim
