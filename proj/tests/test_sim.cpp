#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lorasim/sim.hpp"

using namespace lorasim;
using namespace lorasim::sim;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("every canned scenario builds and validates") {
  for (const auto& name : canned_names()) {
    Scenario s = make_canned(name);
    CHECK(s.name == name);
  }
  CHECK_THROWS_AS(make_canned("no-such-thing"), ScenarioError);

  Scenario baseline = make_canned("baseline");
  CHECK(baseline.devices.size() == 1);
  CHECK(baseline.gateways.size() == 1);
  CHECK(baseline.attackers.empty());

  Scenario jam = make_canned("jam-impersonation");
  CHECK(jam.devices[0].cfg.sf == 10);
  REQUIRE(jam.attackers.size() == 1);
  CHECK(jam.attackers[0].cfg.mode == attacks::AttackMode::ImpostorJam);
  CHECK(jam.attackers[0].cfg.jammer.kind == attacks::JammerKind::Wormhole);
  CHECK(jam.attackers[0].target_gateway_id == "gw-1");
}

TEST_CASE("scenario JSON: canned reference with overrides") {
  Scenario s = load_scenario_json(
      R"({"schema":1,"canned":"baseline","seed":7,"horizon_ms":120000,"mic_mode":"v1_1"})");
  CHECK(s.seed == 7);
  CHECK(s.horizon_ms == 120000);
  CHECK(s.mic_mode == mac::MicMode::V1_1);
  CHECK(s.devices.size() == 1);
}

TEST_CASE("scenario JSON: full inline definition") {
  Scenario s = load_scenario_json(R"({
    "schema": 1,
    "name": "inline-test",
    "seed": 3,
    "horizon_ms": 60000,
    "route_policy": "most_frequent",
    "channel": {"jam_success": {"9": 0.25}, "crc_policy_on_jam": "lose"},
    "devices": [{"id": "d", "dev_addr": "01020304", "sf": 9, "uplink_interval_ms": 5000}],
    "gateways": [{"id": "g", "eui": "aabbccddeeff0011", "addr": "10.0.0.5:1700",
                  "link": {"eavesdroppable": false, "authenticated": true}}],
    "attacker": {"id": "atk", "target_gateway": "g", "mode": "jam",
                 "attack_start_ms": 1000,
                 "jammer": {"kind": "selective", "targets": ["01020304"]}},
    "adjacency": [["d", "g"], ["atk-jam", "g"], ["d", "atk-jam"]]
  })");
  CHECK(s.route_policy == nodes::RoutePolicy::MostFrequent);
  CHECK(s.channel.jam_success[9] == 0.25);
  CHECK(s.channel.crc_policy_on_jam == radio::CrcPolicyOnJam::Lose);
  CHECK(s.gateways[0].cfg.link.authenticated);
  CHECK(s.attackers.size() == 1);
  CHECK(s.attackers[0].cfg.jammer.kind == attacks::JammerKind::Selective);
}

TEST_CASE("scenario files load from disk") {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "lorasim_scn.json";
  {
    std::ofstream out(path);
    out << R"({"schema":1,"canned":"baseline","seed":9,"horizon_ms":30000})";
  }
  Scenario s = load_scenario_file(path.string());
  CHECK(s.seed == 9);
  CHECK(s.horizon_ms == 30000);
  fs::remove(path);
  CHECK_THROWS_AS(load_scenario_file("/nonexistent/scenario.json"), ScenarioError);
}

TEST_CASE("scenario validation rejects broken documents") {
  CHECK_THROWS_AS(load_scenario_json("{nope"), ScenarioError);
  CHECK_THROWS_AS(load_scenario_json(R"({"schema":2,"canned":"baseline"})"), ScenarioError);
  // adjacency naming an unknown node
  CHECK_THROWS_AS(load_scenario_json(R"({
    "devices": [{"id": "d"}], "gateways": [{"id": "g"}],
    "adjacency": [["d", "ghost"]]})"),
                  ScenarioError);
  // sf out of range
  CHECK_THROWS_AS(load_scenario_json(R"({
    "devices": [{"id": "d", "sf": 6}], "gateways": [{"id": "g"}],
    "adjacency": [["d", "g"]]})"),
                  ScenarioError);
  // jam probability out of range
  CHECK_THROWS_AS(load_scenario_json(R"({
    "channel": {"jam_success": {"9": 1.5}},
    "devices": [{"id": "d"}], "gateways": [{"id": "g"}]})"),
                  ScenarioError);
  // selective jammer without targets
  CHECK_THROWS_AS(load_scenario_json(R"({
    "devices": [{"id": "d"}], "gateways": [{"id": "g"}],
    "attacker": {"id": "a", "target_gateway": "g", "mode": "jam",
                 "jammer": {"kind": "selective"}}})"),
                  ScenarioError);
  // duplicate addresses
  CHECK_THROWS_AS(load_scenario_json(R"({
    "gateways": [{"id": "g1", "addr": "10.0.0.2:1"}, {"id": "g2", "addr": "10.0.0.2:1"}]})"),
                  ScenarioError);
  // attacker targeting an unknown gateway
  CHECK_THROWS_AS(load_scenario_json(R"({
    "gateways": [{"id": "g"}],
    "attacker": {"id": "a", "target_gateway": "ghost", "mode": "disconnect"}})"),
                  ScenarioError);
}

TEST_CASE("healthy confirmed uplink is one PUSH/ACK/RESP/TX_ACK exchange") {
  Scenario s = make_canned("baseline");
  s.horizon_ms = 20000; // exactly one uplink at t=5s
  MemoryTraceWriter trace;
  Simulation sim(s, &trace);
  sim.run();
  std::map<std::string, int> kinds;
  for (const auto& rec : trace.records())
    if (rec.value("ev", "") == "dgram") ++kinds[rec.value("kind", "?")];
  CHECK(kinds["PUSH_DATA"] == 1);
  CHECK(kinds["PUSH_ACK"] == 1);
  CHECK(kinds["PULL_RESP"] == 1);
  CHECK(kinds["TX_ACK"] == 1);
}

TEST_CASE("doubling the horizon doubles uplinks within one") {
  Scenario s = make_canned("baseline");
  auto r1 = run_scenario(s);
  s.horizon_ms *= 2;
  auto r2 = run_scenario(s);
  auto u1 = r1.metrics.devices.at("dev-1").uplinks_sent;
  auto u2 = r2.metrics.devices.at("dev-1").uplinks_sent;
  CHECK(std::abs(u2 - 2 * u1) <= 1);
}

TEST_CASE("same seed, same trace; different seed, different tokens") {
  Scenario s = make_canned("jam-impersonation");
  s.horizon_ms = 300000;
  auto dump = [&](std::uint64_t seed) {
    Scenario sc = s;
    sc.seed = seed;
    MemoryTraceWriter trace;
    Simulation sim(sc, &trace);
    sim.run();
    std::string out;
    for (const auto& rec : trace.records()) out += rec.dump() + "\n";
    return out;
  };
  auto a = dump(9);
  auto b = dump(9);
  CHECK(a == b);
  CHECK(dump(9) != dump(10));
}

TEST_CASE("metrics respect their own bounds") {
  for (const char* name : {"baseline", "disconnect-impersonation", "jam-impersonation"}) {
    Scenario s = make_canned(name);
    if (s.horizon_ms > 700000) s.horizon_ms = 700000;
    auto res = run_scenario(s);
    for (const auto& [id, d] : res.metrics.devices) {
      CHECK(d.delivered <= d.uplinks_sent * (1 + 3));
      CHECK(d.acked_genuine + d.acked_spoofed + d.presumed_lost <= d.uplinks_sent);
    }
    for (const auto& [id, g] : res.metrics.gateways) {
      CHECK(g.corrupt_fraction >= 0.0);
      CHECK(g.corrupt_fraction <= 1.0);
    }
    CHECK(res.metrics.server.corrupt_fraction >= 0.0);
    CHECK(res.metrics.server.corrupt_fraction <= 1.0);
    if (std::string(name) == "baseline") CHECK(res.metrics.server.corrupt_fraction == 0.0);
  }
}

TEST_CASE("session keys never appear in traces, metrics, or alerts") {
  Scenario s = make_canned("disconnect-impersonation");
  MemoryTraceWriter trace;
  Simulation sim(s, &trace);
  auto res = sim.run();

  std::string key_hex = to_hex(s.devices[0].cfg.key.bytes.data(), 16);
  std::string all;
  for (const auto& rec : trace.records()) all += rec.dump();
  all += res.metrics.to_json().dump();
  for (const auto& a : res.alerts) all += a.evidence;
  CHECK(all.find(key_hex) == std::string::npos);
}

TEST_CASE("trace sequence numbers are dense and timestamps nondecreasing") {
  Scenario s = make_canned("baseline");
  s.horizon_ms = 100000;
  MemoryTraceWriter trace;
  Simulation sim(s, &trace);
  sim.run();
  double last_t = -1;
  std::uint64_t expect_seq = 0;
  for (const auto& rec : trace.records()) {
    CHECK(rec.at("seq").get<std::uint64_t>() == expect_seq++);
    double t = rec.at("t").get<double>();
    CHECK(t >= last_t);
    last_t = t;
  }
}

TEST_CASE("run_scenario writes the four output files") {
  namespace fs = std::filesystem;
  std::string dir = (fs::temp_directory_path() / "lorasim_test_out").string();
  fs::remove_all(dir);
  Scenario s = make_canned("baseline");
  s.horizon_ms = 60000;
  auto res = run_scenario(s, dir);
  CHECK(res.metrics.events > 0);
  for (const char* f : {"metrics.json", "trace.jsonl", "alerts.jsonl", "summary.csv"})
    CHECK(fs::exists(fs::path(dir) / f));

  auto metrics = nlohmann::json::parse(slurp(dir + "/metrics.json"));
  CHECK(metrics["schema"] == 1);
  CHECK(metrics["devices"].contains("dev-1"));
  std::string csv = slurp(dir + "/summary.csv");
  CHECK(csv.find("device,dev-1") != std::string::npos);
  CHECK(csv.find("gateway,gw-1") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("unwritable output destinations are an error") {
  Scenario s = make_canned("baseline");
  s.horizon_ms = 20000;
  CHECK_THROWS(run_scenario(s, "/proc/definitely/not/writable"));
}

TEST_CASE("registry export reflects traffic seen during the run") {
  Scenario s = make_canned("baseline");
  s.horizon_ms = 60000;
  Simulation sim(s);
  sim.run();
  auto doc = nlohmann::json::parse(sim.registry().export_json());
  REQUIRE(doc["gateways"].size() == 1);
  CHECK(doc["gateways"][0]["id"] == "eui-0102030405060701");
  CHECK(doc["gateways"][0]["last-seen"].get<double>() > 0);
}

TEST_CASE("sf-sweep summary carries one gateway row per spreading factor") {
  Scenario s = make_canned("sf-sweep");
  s.horizon_ms = 30000; // a short slice is enough for the row shape
  auto res = run_scenario(s);
  std::set<int> sfs;
  for (const auto& [id, g] : res.metrics.gateways) sfs.insert(g.sf_label);
  CHECK(sfs == std::set<int>{7, 8, 9, 10, 11, 12});
  std::string csv = res.metrics.to_csv();
  for (int sf = 7; sf <= 12; ++sf)
    CHECK(csv.find("gateway,gw-" + std::to_string(sf) + "," + std::to_string(sf)) !=
          std::string::npos);
}
