#include "lorasim/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace lorasim::sim {

using nlohmann::json;

namespace {

mac::DevAddr make_dev_addr(int idx) {
  mac::DevAddr a;
  a.bytes = {0x26, 0x01, 0x1b, static_cast<std::uint8_t>(idx & 0xff)};
  return a;
}

mac::NwkSKey make_key(int idx) {
  mac::NwkSKey k;
  for (std::size_t i = 0; i < k.bytes.size(); ++i)
    k.bytes[i] = static_cast<std::uint8_t>((0xa0 + idx * 7 + i * 13) & 0xff);
  return k;
}

codec::GatewayEui make_eui(int idx) {
  codec::GatewayEui e;
  e.bytes = {0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07, static_cast<std::uint8_t>(idx & 0xff)};
  return e;
}

DeviceSpec make_device(const std::string& id, int idx, int sf, double interval_ms,
                       double first_ms, bool confirmed) {
  DeviceSpec d;
  d.cfg.id = id;
  d.cfg.dev_addr = make_dev_addr(idx);
  d.cfg.key = make_key(idx);
  d.cfg.sf = sf;
  d.cfg.confirmed = confirmed;
  d.uplink_interval_ms = interval_ms;
  d.first_uplink_ms = first_ms;
  return d;
}

GatewaySpec make_gateway(const std::string& id, int idx, const std::string& addr,
                         double pull_ms, double first_ms) {
  GatewaySpec g;
  g.cfg.id = id;
  g.cfg.eui = make_eui(idx);
  g.cfg.addr = addr;
  g.cfg.pull_interval_ms = pull_ms;
  g.cfg.first_pull_ms = first_ms;
  g.location = "site-" + std::to_string(idx);
  return g;
}

Scenario baseline_scenario() {
  Scenario s;
  s.name = "baseline";
  s.seed = 42;
  s.horizon_ms = 600000;
  s.devices.push_back(make_device("dev-1", 1, 7, 15000, 5000, true));
  s.gateways.push_back(make_gateway("gw-1", 1, "10.0.1.10:34001", 10000, 1000));
  s.adjacency = {{"dev-1", "gw-1"}};
  return s;
}

AttackerSpec make_attacker(const std::string& target_gw, attacks::AttackMode mode,
                           double start_ms) {
  AttackerSpec a;
  a.cfg.id = "atk";
  a.cfg.addr = "10.66.0.2:40001";
  a.cfg.mode = mode;
  a.cfg.attack_start_ms = start_ms;
  a.target_gateway_id = target_gw;
  return a;
}

Scenario disconnect_scenario() {
  Scenario s = baseline_scenario();
  s.name = "disconnect-impersonation";
  s.horizon_ms = 300000;
  auto atk = make_attacker("gw-1", attacks::AttackMode::ImpostorDisconnect, 60000);
  atk.cfg.ack_spoof = true;
  s.attackers.push_back(std::move(atk));
  s.adjacency.push_back({"dev-1", "atk-gw"});
  return s;
}

Scenario jam_scenario() {
  Scenario s = baseline_scenario();
  s.name = "jam-impersonation";
  s.horizon_ms = 2200000;
  s.devices[0].cfg.sf = 10;
  s.devices[0].uplink_interval_ms = 10000;
  auto atk = make_attacker("gw-1", attacks::AttackMode::ImpostorJam, 120000);
  atk.cfg.jammer.kind = attacks::JammerKind::Wormhole;
  atk.cfg.jammer.targets = {s.devices[0].cfg.dev_addr};
  s.attackers.push_back(std::move(atk));
  s.adjacency.push_back({"dev-1", "atk-gw"});
  s.adjacency.push_back({"atk-jam", "gw-1"});
  return s;
}

Scenario redundancy_scenario() {
  Scenario s = disconnect_scenario();
  s.name = "redundancy-defense";
  s.gateways.push_back(make_gateway("gw-2", 2, "10.0.2.20:34002", 10000, 1500));
  s.adjacency.push_back({"dev-1", "gw-2"});
  return s;
}

Scenario authenticated_link_scenario() {
  Scenario s = disconnect_scenario();
  s.name = "authenticated-link-defense";
  s.gateways[0].cfg.link.eavesdroppable = false;
  s.gateways[0].cfg.link.authenticated = true;
  s.server.require_authenticated_link = true;
  s.attackers[0].cfg.registry_access = true;
  return s;
}

Scenario sf_sweep_scenario() {
  Scenario s;
  s.name = "sf-sweep";
  s.seed = 42;
  s.horizon_ms = 2002000;
  for (int sf = 7; sf <= 12; ++sf) {
    std::string n = std::to_string(sf);
    auto dev = make_device("dev-" + n, sf, sf, 2000, 1000, false);
    auto gw = make_gateway("gw-" + n, sf, "10.0.1." + n + ":34001", 30000, 1000);
    gw.sf_label = sf;

    AttackerSpec atk;
    atk.cfg.id = "atk-" + n;
    atk.cfg.addr = "10.66.0." + n + ":40001";
    atk.cfg.mode = attacks::AttackMode::ImpostorJam;
    atk.cfg.attack_start_ms = 0;
    atk.cfg.impostor = false; // jammer-only islands
    atk.cfg.jammer.kind = attacks::JammerKind::Wormhole;
    atk.cfg.jammer.targets = {dev.cfg.dev_addr};
    atk.target_gateway_id = gw.cfg.id;

    s.adjacency.push_back({dev.cfg.id, gw.cfg.id});
    s.adjacency.push_back({dev.cfg.id, atk.cfg.id + "-gw"});
    s.adjacency.push_back({atk.cfg.id + "-jam", gw.cfg.id});
    s.devices.push_back(std::move(dev));
    s.gateways.push_back(std::move(gw));
    s.attackers.push_back(std::move(atk));
  }
  return s;
}

Scenario pull_flood_scenario() {
  Scenario s;
  s.name = "pull-flood";
  s.seed = 42;
  s.horizon_ms = 2160000;
  auto gw = make_gateway("gw-1", 1, "10.0.1.10:34001", 10000, 1000);
  gw.cfg.pull_jitter = nodes::PullJitter::Exponential;
  s.gateways.push_back(std::move(gw));

  auto atk = make_attacker("gw-1", attacks::AttackMode::ImpostorJam, 120000);
  atk.cfg.pull_flood_factor = 3;
  atk.cfg.pull_jitter = nodes::PullJitter::Exponential;
  atk.cfg.jammer.kind = attacks::JammerKind::Constant;
  s.attackers.push_back(std::move(atk));
  s.adjacency.push_back({"atk-jam", "gw-1"});

  s.server.probe_interval_ms = 2000;
  s.server.probe_start_ms = 150000;
  s.server.probe_jitter = true;
  s.server.probe_gateway_ids = {"gw-1"};
  s.server.measure_start_ms = 150000;
  return s;
}

// ---------------------------------------------------------------------------
// JSON loading

double get_num(const json& j, const char* key, double def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_number()) throw ScenarioError(std::string(key) + " must be a number");
  return j[key].get<double>();
}

bool get_bool(const json& j, const char* key, bool def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_boolean()) throw ScenarioError(std::string(key) + " must be a boolean");
  return j[key].get<bool>();
}

std::string get_str(const json& j, const char* key, const std::string& def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_string()) throw ScenarioError(std::string(key) + " must be a string");
  return j[key].get<std::string>();
}

mac::MicMode parse_mic_mode(const std::string& s) {
  if (s == "v1_0") return mac::MicMode::V1_0;
  if (s == "v1_1") return mac::MicMode::V1_1;
  throw ScenarioError("mic_mode must be v1_0 or v1_1, got '" + s + "'");
}

nodes::PullJitter parse_jitter(const std::string& s) {
  if (s == "none") return nodes::PullJitter::None;
  if (s == "exponential") return nodes::PullJitter::Exponential;
  throw ScenarioError("pull_jitter must be none or exponential, got '" + s + "'");
}

nodes::LinkAttrs parse_link(const json& j) {
  nodes::LinkAttrs l;
  l.eavesdroppable = get_bool(j, "eavesdroppable", l.eavesdroppable);
  l.authenticated = get_bool(j, "authenticated", l.authenticated);
  return l;
}

void apply_overrides(Scenario& s, const json& j) {
  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  s.horizon_ms = get_num(j, "horizon_ms", s.horizon_ms);
  if (j.contains("mic_mode")) s.mic_mode = parse_mic_mode(j["mic_mode"].get<std::string>());
  if (j.contains("route_policy")) {
    auto p = nodes::route_policy_from_string(j["route_policy"].get<std::string>());
    if (!p) throw ScenarioError("unknown route_policy");
    s.route_policy = *p;
  }
  if (j.contains("name")) s.name = j["name"].get<std::string>();
}

DeviceSpec parse_device(const json& j, int idx) {
  DeviceSpec d;
  d.cfg.id = get_str(j, "id", "dev-" + std::to_string(idx + 1));
  if (j.contains("dev_addr")) {
    auto a = mac::DevAddr::from_hex(j["dev_addr"].get<std::string>());
    if (!a) throw ScenarioError("device " + d.cfg.id + ": dev_addr must be 8 hex digits");
    d.cfg.dev_addr = *a;
  } else {
    d.cfg.dev_addr = make_dev_addr(idx + 1);
  }
  if (j.contains("key")) {
    auto raw = from_hex(j["key"].get<std::string>());
    if (!raw || raw->size() != 16)
      throw ScenarioError("device " + d.cfg.id + ": key must be 32 hex digits");
    std::copy(raw->begin(), raw->end(), d.cfg.key.bytes.begin());
  } else {
    d.cfg.key = make_key(idx + 1);
  }
  d.cfg.sf = static_cast<int>(get_num(j, "sf", 7));
  d.cfg.confirmed = get_bool(j, "confirmed", true);
  d.cfg.retransmit_limit = static_cast<int>(get_num(j, "retransmit_limit", 3));
  d.cfg.payload_len = static_cast<std::size_t>(get_num(j, "payload_len", 25));
  d.uplink_interval_ms = get_num(j, "uplink_interval_ms", 15000);
  d.first_uplink_ms = get_num(j, "first_uplink_ms", 5000);
  return d;
}

GatewaySpec parse_gateway(const json& j, int idx) {
  GatewaySpec g;
  g.cfg.id = get_str(j, "id", "gw-" + std::to_string(idx + 1));
  if (j.contains("eui")) {
    auto e = codec::GatewayEui::from_hex(j["eui"].get<std::string>());
    if (!e) throw ScenarioError("gateway " + g.cfg.id + ": eui must be 16 hex digits");
    g.cfg.eui = *e;
  } else {
    g.cfg.eui = make_eui(idx + 1);
  }
  g.cfg.addr = get_str(j, "addr", "10.0.1." + std::to_string(idx + 10) + ":34001");
  g.cfg.pull_interval_ms = get_num(j, "pull_interval_ms", 10000);
  g.cfg.first_pull_ms = get_num(j, "first_pull_ms", 1000);
  std::string policy = get_str(j, "crc_forward_policy", "forward_with_stat");
  if (policy == "forward_with_stat")
    g.cfg.crc_policy = nodes::CrcForwardPolicy::ForwardWithStat;
  else if (policy == "drop")
    g.cfg.crc_policy = nodes::CrcForwardPolicy::Drop;
  else
    throw ScenarioError("crc_forward_policy must be forward_with_stat or drop");
  g.cfg.pull_jitter = parse_jitter(get_str(j, "pull_jitter", "none"));
  g.cfg.forward_latency_ms = get_num(j, "forward_latency_ms", 0);
  g.cfg.registered = get_bool(j, "registered", true);
  g.cfg.physically_protected = get_bool(j, "physically_protected", false);
  if (j.contains("link")) g.cfg.link = parse_link(j["link"]);
  g.location = get_str(j, "location", "");
  g.sf_label = static_cast<int>(get_num(j, "sf_label", 0));
  return g;
}

AttackerSpec parse_attacker(const json& j, int idx) {
  AttackerSpec a;
  a.cfg.id = get_str(j, "id", idx == 0 ? "atk" : "atk-" + std::to_string(idx + 1));
  a.target_gateway_id = get_str(j, "target_gateway", "");
  std::string mode = get_str(j, "mode", "idle");
  if (mode == "idle")
    a.cfg.mode = attacks::AttackMode::Idle;
  else if (mode == "disconnect")
    a.cfg.mode = attacks::AttackMode::ImpostorDisconnect;
  else if (mode == "jam")
    a.cfg.mode = attacks::AttackMode::ImpostorJam;
  else
    throw ScenarioError("attacker mode must be idle, disconnect or jam");
  a.cfg.attack_start_ms = get_num(j, "attack_start_ms", 60000);
  a.cfg.pull_flood_factor = get_num(j, "pull_flood_factor", 1);
  a.cfg.impostor = get_bool(j, "impostor", true);
  a.cfg.ack_spoof = get_bool(j, "ack_spoof", false);
  a.cfg.registry_access = get_bool(j, "registry_access", false);
  a.cfg.addr = get_str(j, "addr", "10.66.0." + std::to_string(idx + 2) + ":40001");
  a.cfg.forward_latency_ms = get_num(j, "forward_latency_ms", 5);
  a.cfg.pull_jitter = parse_jitter(get_str(j, "pull_jitter", "none"));
  if (j.contains("jammer")) {
    const json& jm = j["jammer"];
    auto kind = attacks::jammer_kind_from_string(get_str(jm, "kind", "wormhole"));
    if (!kind) throw ScenarioError("unknown jammer kind");
    a.cfg.jammer.kind = *kind;
    if (jm.contains("targets")) {
      for (const auto& t : jm["targets"]) {
        auto da = mac::DevAddr::from_hex(t.get<std::string>());
        if (!da) throw ScenarioError("jammer target must be 8 hex digits");
        a.cfg.jammer.targets.push_back(*da);
      }
    }
    a.cfg.jammer.trigger_latency_ms = get_num(jm, "trigger_latency_ms", 10);
    a.cfg.jammer.detect_latency_ms = get_num(jm, "detect_latency_ms", 5);
    a.cfg.jammer.header_scan_fraction = get_num(jm, "header_scan_fraction", 0.25);
    a.cfg.jammer.record_tail_fraction = get_num(jm, "record_tail_fraction", 0.1);
  }
  return a;
}

Scenario parse_full(const json& j) {
  Scenario s;
  s.name = get_str(j, "name", "custom");
  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  s.horizon_ms = get_num(j, "horizon_ms", s.horizon_ms);
  s.channel_mhz = get_num(j, "channel_mhz", s.channel_mhz);
  if (j.contains("mic_mode")) s.mic_mode = parse_mic_mode(j["mic_mode"].get<std::string>());
  if (j.contains("route_policy")) {
    auto p = nodes::route_policy_from_string(j["route_policy"].get<std::string>());
    if (!p) throw ScenarioError("unknown route_policy");
    s.route_policy = *p;
  }
  if (j.contains("channel")) {
    const json& c = j["channel"];
    if (c.contains("jam_success")) {
      for (const auto& [k, v] : c["jam_success"].items()) {
        int sf = std::stoi(k);
        if (sf < 7 || sf > 12) throw ScenarioError("jam_success key out of range [7,12]");
        double p = v.get<double>();
        if (p < 0 || p > 1) throw ScenarioError("jam_success probability out of [0,1]");
        s.channel.jam_success[static_cast<std::size_t>(sf)] = p;
      }
    }
    std::string policy = get_str(c, "crc_policy_on_jam", "corrupt");
    if (policy == "corrupt")
      s.channel.crc_policy_on_jam = radio::CrcPolicyOnJam::Corrupt;
    else if (policy == "lose")
      s.channel.crc_policy_on_jam = radio::CrcPolicyOnJam::Lose;
    else
      throw ScenarioError("crc_policy_on_jam must be corrupt or lose");
    s.channel.base_airtime_ms = get_num(c, "base_airtime_ms", s.channel.base_airtime_ms);
  }
  if (j.contains("rx_windows")) {
    const json& r = j["rx_windows"];
    s.rx.rx1_delay_ms = get_num(r, "rx1_delay_ms", s.rx.rx1_delay_ms);
    s.rx.rx2_delay_ms = get_num(r, "rx2_delay_ms", s.rx.rx2_delay_ms);
    s.rx.width_ms = get_num(r, "width_ms", s.rx.width_ms);
  }
  if (j.contains("server")) {
    const json& sv = j["server"];
    s.server.addr = get_str(sv, "addr", s.server.addr);
    s.server.require_registration = get_bool(sv, "require_registration", false);
    s.server.require_authenticated_link = get_bool(sv, "require_authenticated_link", false);
    s.server.probe_interval_ms = get_num(sv, "probe_interval_ms", 0);
    s.server.probe_start_ms = get_num(sv, "probe_start_ms", 0);
    s.server.probe_jitter = get_bool(sv, "probe_jitter", true);
    s.server.probe_sf = static_cast<int>(get_num(sv, "probe_sf", 7));
    if (sv.contains("probe_gateways"))
      for (const auto& g : sv["probe_gateways"])
        s.server.probe_gateway_ids.push_back(g.get<std::string>());
    s.server.measure_start_ms = get_num(sv, "measure_start_ms", 0);
  }
  if (j.contains("ids")) {
    const json& i = j["ids"];
    s.ids.enabled = get_bool(i, "enabled", true);
    s.ids.cfg.window_ms = get_num(i, "window_ms", s.ids.cfg.window_ms);
    s.ids.cfg.warmup_ms = get_num(i, "warmup_ms", s.ids.cfg.warmup_ms);
    s.ids.cfg.min_samples = static_cast<int>(get_num(i, "min_samples", s.ids.cfg.min_samples));
    s.ids.cfg.pull_rate_factor = get_num(i, "pull_rate_factor", s.ids.cfg.pull_rate_factor);
    s.ids.cfg.crc_baseline_max = get_num(i, "crc_baseline_max", s.ids.cfg.crc_baseline_max);
    s.ids.cfg.crc_window_min = get_num(i, "crc_window_min", s.ids.cfg.crc_window_min);
  }
  if (j.contains("devices")) {
    int idx = 0;
    for (const auto& d : j["devices"]) s.devices.push_back(parse_device(d, idx++));
  }
  if (j.contains("gateways")) {
    int idx = 0;
    for (const auto& g : j["gateways"]) s.gateways.push_back(parse_gateway(g, idx++));
  }
  if (j.contains("attacker")) s.attackers.push_back(parse_attacker(j["attacker"], 0));
  if (j.contains("attackers")) {
    int idx = 0;
    for (const auto& a : j["attackers"]) s.attackers.push_back(parse_attacker(a, idx++));
  }
  if (j.contains("adjacency")) {
    for (const auto& pair : j["adjacency"]) {
      if (!pair.is_array() || pair.size() != 2)
        throw ScenarioError("adjacency entries must be [a, b] pairs");
      s.adjacency.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
    }
  }
  return s;
}

} // namespace

std::vector<std::string> canned_names() {
  return {"baseline",
          "disconnect-impersonation",
          "jam-impersonation",
          "redundancy-defense",
          "authenticated-link-defense",
          "sf-sweep",
          "pull-flood"};
}

Scenario make_canned(const std::string& name) {
  Scenario s;
  if (name == "baseline")
    s = baseline_scenario();
  else if (name == "disconnect-impersonation")
    s = disconnect_scenario();
  else if (name == "jam-impersonation")
    s = jam_scenario();
  else if (name == "redundancy-defense")
    s = redundancy_scenario();
  else if (name == "authenticated-link-defense")
    s = authenticated_link_scenario();
  else if (name == "sf-sweep")
    s = sf_sweep_scenario();
  else if (name == "pull-flood")
    s = pull_flood_scenario();
  else
    throw ScenarioError("unknown canned scenario '" + name + "'");
  validate(s);
  return s;
}

Scenario load_scenario_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ScenarioError("scenario document is not valid JSON");
  if (!j.is_object()) throw ScenarioError("scenario document must be a JSON object");
  if (j.contains("schema") && j["schema"].get<int>() != 1)
    throw ScenarioError("unsupported scenario schema version");

  Scenario s;
  if (j.contains("canned")) {
    s = make_canned(j["canned"].get<std::string>());
    apply_overrides(s, j);
  } else {
    s = parse_full(j);
  }
  validate(s);
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_scenario_json(ss.str());
}

std::vector<std::string> node_ids(const Scenario& s) {
  std::vector<std::string> ids;
  for (const auto& d : s.devices) ids.push_back(d.cfg.id);
  for (const auto& g : s.gateways) ids.push_back(g.cfg.id);
  for (const auto& a : s.attackers) {
    ids.push_back(a.cfg.id + "-gw");
    ids.push_back(a.cfg.id + "-jam");
  }
  return ids;
}

void validate(const Scenario& s) {
  if (s.horizon_ms <= 0) throw ScenarioError("horizon_ms must be positive");

  std::set<std::string> ids;
  for (const auto& id : node_ids(s))
    if (!ids.insert(id).second) throw ScenarioError("duplicate node id '" + id + "'");

  std::set<std::string> addrs{s.server.addr};
  std::set<std::string> gw_ids;
  std::set<std::string> euis;
  for (const auto& g : s.gateways) {
    gw_ids.insert(g.cfg.id);
    if (!addrs.insert(g.cfg.addr).second)
      throw ScenarioError("duplicate network address '" + g.cfg.addr + "'");
    if (!euis.insert(g.cfg.eui.hex()).second)
      throw ScenarioError("duplicate gateway EUI '" + g.cfg.eui.to_string() + "'");
    if (g.cfg.pull_interval_ms <= 0) throw ScenarioError("pull_interval_ms must be positive");
  }
  std::set<std::string> dev_addrs;
  for (const auto& d : s.devices) {
    if (d.cfg.sf < 7 || d.cfg.sf > 12)
      throw ScenarioError("device " + d.cfg.id + ": sf out of range [7,12]");
    if (d.uplink_interval_ms <= 0) throw ScenarioError("uplink_interval_ms must be positive");
    if (d.cfg.retransmit_limit < 0) throw ScenarioError("retransmit_limit must be >= 0");
    if (!dev_addrs.insert(d.cfg.dev_addr.hex()).second)
      throw ScenarioError("duplicate dev_addr '" + d.cfg.dev_addr.hex() + "'");
  }
  for (const auto& a : s.attackers) {
    if (!addrs.insert(a.cfg.addr).second)
      throw ScenarioError("duplicate network address '" + a.cfg.addr + "'");
    if (a.cfg.mode != attacks::AttackMode::Idle) {
      if (a.target_gateway_id.empty() || !gw_ids.count(a.target_gateway_id))
        throw ScenarioError("attacker " + a.cfg.id + ": target_gateway '" +
                            a.target_gateway_id + "' is not a gateway id");
    }
    if (a.cfg.pull_flood_factor < 1)
      throw ScenarioError("pull_flood_factor must be >= 1");
    using attacks::JammerKind;
    if (a.cfg.mode == attacks::AttackMode::ImpostorJam &&
        (a.cfg.jammer.kind == JammerKind::Selective ||
         a.cfg.jammer.kind == JammerKind::Wormhole) &&
        a.cfg.jammer.targets.empty())
      throw ScenarioError("selective/wormhole jammer requires a nonempty target set");
  }
  for (std::size_t sf = 7; sf <= 12; ++sf) {
    double p = s.channel.jam_success[sf];
    if (p < 0 || p > 1) throw ScenarioError("jam_success probability out of [0,1]");
  }
  for (const auto& [a, b] : s.adjacency) {
    if (!ids.count(a)) throw ScenarioError("adjacency references unknown node '" + a + "'");
    if (!ids.count(b)) throw ScenarioError("adjacency references unknown node '" + b + "'");
    if (a == b) throw ScenarioError("adjacency cannot link a node to itself");
  }
  for (const auto& g : s.server.probe_gateway_ids)
    if (!gw_ids.count(g))
      throw ScenarioError("probe_gateways references unknown gateway '" + g + "'");
}

} // namespace lorasim::sim
