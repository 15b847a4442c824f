#ifndef LORASIM_SIM_HPP
#define LORASIM_SIM_HPP

// Deterministic scenario runner: builds the ether, nodes, attackers, server
// and detection engine from a Scenario, drives the single-threaded event loop
// to the horizon, and emits metrics, an event trace, and the alert log.

#include <memory>
#include <string>
#include <vector>

#include "lorasim/attacks.hpp"
#include "lorasim/event_queue.hpp"
#include "lorasim/ids.hpp"
#include "lorasim/metrics.hpp"
#include "lorasim/nodes.hpp"
#include "lorasim/radio.hpp"
#include "lorasim/scenario.hpp"
#include "lorasim/trace.hpp"

namespace lorasim::sim {

struct RunResult {
  MetricsReport metrics;
  std::vector<ids::Alert> alerts;
};

class Simulation {
 public:
  explicit Simulation(const Scenario& scenario, TraceWriter* trace = nullptr);

  RunResult run();

  nodes::Server& server() { return *server_; }
  nodes::Registry& registry() { return registry_; }
  nodes::EndDevice& device(std::size_t i) { return *devices_.at(i); }
  nodes::Gateway& gateway(std::size_t i) { return *gateways_.at(i); }
  attacks::Attacker* attacker(std::size_t i = 0) {
    return i < attackers_.size() ? attackers_[i].get() : nullptr;
  }
  radio::Ether& ether() { return *ether_; }
  EventQueue& queue() { return queue_; }
  ids::DetectionEngine* engine() { return engine_.get(); }
  const Scenario& scenario() const { return scn_; }
  const std::vector<ids::Alert>& alerts() const { return alerts_; }

 private:
  void wire();
  void schedule_drivers();
  void device_tick(std::size_t i);
  void dispatch_reception(const radio::Reception& r);
  void send_dgram(const std::string& from, const std::string& to, Bytes bytes);
  nodes::LinkAttrs attrs_of(const std::string& addr) const;
  void finalize();

  Scenario scn_;
  NullTraceWriter null_trace_;
  TraceWriter* trace_;
  EventQueue queue_;
  Rng master_;
  MetricsReport metrics_;
  nodes::Registry registry_;
  std::unique_ptr<radio::Ether> ether_;
  std::vector<std::unique_ptr<nodes::EndDevice>> devices_;
  std::vector<std::unique_ptr<nodes::Gateway>> gateways_;
  std::vector<std::unique_ptr<attacks::Attacker>> attackers_;
  std::unique_ptr<nodes::Server> server_;
  std::unique_ptr<ids::DetectionEngine> engine_;
  std::vector<ids::Alert> alerts_;

  std::vector<std::string> node_names_;           // index -> id
  std::map<std::string, int> node_index_;         // id -> index
  std::map<std::string, std::size_t> addr_to_gateway_;
  std::map<std::string, std::size_t> addr_to_attacker_;
  std::map<int, std::size_t> node_to_device_;
  std::map<int, std::size_t> node_to_gateway_;
  std::map<int, std::size_t> node_to_attacker_;
  std::map<std::string, std::string> devaddr_to_id_;
};

// Runs a scenario; when out_dir is nonempty, writes metrics.json, trace.jsonl,
// alerts.jsonl, and summary.csv there (creating the directory).
RunResult run_scenario(const Scenario& scenario, const std::string& out_dir = "");

} // namespace lorasim::sim

#endif
