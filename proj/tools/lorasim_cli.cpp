// lorasim command-line front end.
//
//   lorasim run --scenario <file|name> [--seed N] [--horizon-ms N] --out DIR
//               [--mic-mode v1_0|v1_1] [--route-policy P] [--listen ADDR:PORT]
//   lorasim list-scenarios
//   lorasim export-gateway-data --out FILE [--scenario <file|name>]

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "lorasim/live.hpp"
#include "lorasim/scenario.hpp"
#include "lorasim/sim.hpp"

namespace {

lorasim::sim::Scenario resolve_scenario(const std::string& ref) {
  namespace fs = std::filesystem;
  auto canned = lorasim::sim::canned_names();
  if (std::find(canned.begin(), canned.end(), ref) != canned.end())
    return lorasim::sim::make_canned(ref);
  if (fs::exists(ref)) return lorasim::sim::load_scenario_file(ref);
  throw lorasim::sim::ScenarioError("'" + ref + "' is neither a canned scenario nor a file");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"LoRaWAN gateway-impersonation simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run a scenario and write outputs");
  std::string scenario_ref = "baseline";
  std::string out_dir;
  std::string mic_mode, route_policy, listen_addr;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double horizon = 0;
  bool horizon_set = false;
  double listen_duration = 0;
  run->add_option("--scenario", scenario_ref, "Canned scenario name or JSON file");
  run->add_option("--seed", seed, "Override the scenario seed")->each([&](auto) { seed_set = true; });
  run->add_option("--horizon-ms", horizon, "Override the horizon")->each([&](auto) { horizon_set = true; });
  run->add_option("--out", out_dir, "Output directory (metrics.json, trace.jsonl, alerts.jsonl, summary.csv)");
  run->add_option("--mic-mode", mic_mode, "v1_0 or v1_1")
      ->check(CLI::IsMember({"v1_0", "v1_1"}));
  run->add_option("--route-policy", route_policy, "last_pull_wins, sticky_first or most_frequent")
      ->check(CLI::IsMember({"last_pull_wins", "sticky_first", "most_frequent"}));
  run->add_option("--listen", listen_addr,
                  "Live-wire mode: serve the scenario's network server on a real UDP socket");
  run->add_option("--listen-duration-ms", listen_duration,
                  "Live-wire serving time in wall ms (0 = until killed)");

  // list-scenarios
  auto* list = app.add_subcommand("list-scenarios", "List canned scenarios");

  // export-gateway-data
  auto* exp = app.add_subcommand("export-gateway-data",
                                 "Write the registry's gateway-data JSON document");
  std::string exp_out;
  std::string exp_scenario = "baseline";
  exp->add_option("--out", exp_out, "Output file")->required();
  exp->add_option("--scenario", exp_scenario, "Scenario whose registry to export");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const auto& name : lorasim::sim::canned_names()) std::cout << name << '\n';
      return 0;
    }

    if (exp->parsed()) {
      auto scn = resolve_scenario(exp_scenario);
      lorasim::sim::Simulation sim(scn);
      std::ofstream out(exp_out);
      if (!out) {
        std::cerr << "error: cannot write '" << exp_out << "'\n";
        return 1;
      }
      out << sim.registry().export_json() << '\n';
      std::cout << "wrote " << exp_out << '\n';
      return 0;
    }

    auto scn = resolve_scenario(scenario_ref);
    if (seed_set) scn.seed = seed;
    if (horizon_set) scn.horizon_ms = horizon;
    if (!mic_mode.empty())
      scn.mic_mode = mic_mode == "v1_1" ? lorasim::mac::MicMode::V1_1
                                        : lorasim::mac::MicMode::V1_0;
    if (!route_policy.empty())
      scn.route_policy = *lorasim::nodes::route_policy_from_string(route_policy);
    lorasim::sim::validate(scn);

    if (!listen_addr.empty()) {
      lorasim::live::LiveWire wire(scn, listen_addr);
      std::cout << "listening on udp port " << wire.port() << " (scenario " << scn.name
                << ")\n";
      auto metrics = wire.run_for(listen_duration);
      std::cout << metrics.to_json().dump(2) << '\n';
      return 0;
    }

    auto res = lorasim::sim::run_scenario(scn, out_dir);
    const auto& m = res.metrics;
    std::cout << "scenario " << m.scenario << " seed " << m.seed << ": " << m.events
              << " events, " << m.server.uplinks_accepted << " uplinks accepted, "
              << m.server.downlinks_sent << " downlinks, " << m.ids.total << " alerts\n";
    for (const auto& [id, d] : m.devices)
      std::cout << "  " << id << ": sent " << d.uplinks_sent << " acked " << d.acked_genuine
                << " spoofed " << d.acked_spoofed << " lost " << d.presumed_lost << '\n';
    if (!out_dir.empty()) std::cout << "outputs in " << out_dir << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
