#ifndef LORASIM_SCENARIO_HPP
#define LORASIM_SCENARIO_HPP

// Scenario configuration: JSON documents with a versioned schema, canned
// scenario builders, and validation. A scenario is pure data; the runner in
// sim.hpp turns it into a wired simulation.

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lorasim/attacks.hpp"
#include "lorasim/ids.hpp"
#include "lorasim/nodes.hpp"
#include "lorasim/radio.hpp"

namespace lorasim::sim {

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DeviceSpec {
  nodes::DeviceConfig cfg;
  double uplink_interval_ms = 15000;
  double first_uplink_ms = 5000;
};

struct GatewaySpec {
  nodes::GatewayConfig cfg;
  std::string location; // registry free text
  int sf_label = 0;     // sweep tag carried into metrics
};

struct AttackerSpec {
  attacks::AttackerConfig cfg;
  std::string target_gateway_id;
};

struct IdsSpec {
  bool enabled = true;
  ids::EngineConfig cfg;
};

struct ServerSpec {
  std::string addr = "10.0.0.1:1700";
  bool require_registration = false;
  bool require_authenticated_link = false;
  double probe_interval_ms = 0;
  double probe_start_ms = 0;
  bool probe_jitter = true;
  int probe_sf = 7;
  std::vector<std::string> probe_gateway_ids;
  double measure_start_ms = 0;
};

struct Scenario {
  std::string name = "custom";
  std::uint64_t seed = 1;
  double horizon_ms = 600000;
  double channel_mhz = 868.1;
  radio::ChannelModel channel = radio::ChannelModel::with_defaults();
  nodes::RxWindows rx;
  mac::MicMode mic_mode = mac::MicMode::V1_0;
  nodes::RoutePolicy route_policy = nodes::RoutePolicy::LastPullWins;
  ServerSpec server;
  std::vector<DeviceSpec> devices;
  std::vector<GatewaySpec> gateways;
  std::vector<AttackerSpec> attackers;
  std::vector<std::pair<std::string, std::string>> adjacency; // node ids
  IdsSpec ids;
};

// Throws ScenarioError on parse errors, dangling references, out-of-range
// spreading factors or probabilities.
Scenario load_scenario_json(const std::string& text);
Scenario load_scenario_file(const std::string& path);

std::vector<std::string> canned_names();
Scenario make_canned(const std::string& name); // throws ScenarioError on unknown

void validate(const Scenario& s); // throws ScenarioError

// Node ids a scenario defines: device ids, gateway ids, and per attacker
// "<id>-gw" and "<id>-jam".
std::vector<std::string> node_ids(const Scenario& s);

} // namespace lorasim::sim

#endif
