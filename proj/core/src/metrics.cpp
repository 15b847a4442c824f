#include "lorasim/metrics.hpp"

#include <sstream>

namespace lorasim::sim {

using nlohmann::json;

json MetricsReport::to_json() const {
  json j;
  j["schema"] = 1;
  j["scenario"] = scenario;
  j["seed"] = seed;
  j["horizon_ms"] = horizon_ms;
  j["events"] = events;

  json devs = json::object();
  for (const auto& [id, d] : devices) {
    devs[id] = {
        {"sf", d.sf},
        {"uplinks_sent", d.uplinks_sent},
        {"delivered", d.delivered},
        {"acked_genuine", d.acked_genuine},
        {"acked_spoofed", d.acked_spoofed},
        {"presumed_lost", d.presumed_lost},
        {"rejected_counter", d.rejected_counter},
        {"rejected_mic", d.rejected_mic},
        {"retransmissions", d.retransmissions},
        {"inversion_observed", d.inversion_observed},
    };
  }
  j["devices"] = std::move(devs);

  json gws = json::object();
  for (const auto& [id, g] : gateways) {
    gws[id] = {
        {"eui", g.eui},
        {"sf_label", g.sf_label},
        {"receptions", g.receptions},
        {"receptions_crc_failed", g.receptions_crc_failed},
        {"corrupt_fraction", g.corrupt_fraction},
        {"pushes", g.pushes},
        {"pushes_stat_corrupt", g.pushes_stat_corrupt},
        {"pulls_sent", g.pulls_sent},
        {"pull_resps", g.pull_resps},
        {"tx_acks_sent", g.tx_acks_sent},
    };
  }
  j["gateways"] = std::move(gws);

  j["server"] = {
      {"push_data", server.push_data},
      {"pull_data", server.pull_data},
      {"uplinks_accepted", server.uplinks_accepted},
      {"duplicates_dropped", server.duplicates_dropped},
      {"acks_sent", server.acks_sent},
      {"downlinks_sent", server.downlinks_sent},
      {"downlinks_dropped_no_route", server.downlinks_dropped_no_route},
      {"untrusted_datagrams", server.untrusted_datagrams},
      {"unauthenticated_dropped", server.unauthenticated_dropped},
      {"undecodable_bodies", server.undecodable_bodies},
      {"probe_downlinks", server.probe_downlinks},
      {"copies_total", server.copies_total},
      {"copies_corrupt", server.copies_corrupt},
      {"copies_total_attack", server.copies_total_attack},
      {"copies_corrupt_attack", server.copies_corrupt_attack},
      {"corrupt_fraction", server.corrupt_fraction},
      {"corrupt_fraction_attack", server.corrupt_fraction_attack},
      {"downlinks_by_address", server.downlinks_by_address},
      {"downlinks_by_address_measured", server.downlinks_by_address_measured},
  };

  if (has_attacker) {
    j["attacker"] = {
        {"sniff_result", attacker.sniff_result},
        {"eui_source", attacker.eui_source},
        {"stolen_eui", attacker.stolen_eui},
        {"final_phase", attacker.final_phase},
        {"disable_refused", attacker.disable_refused},
        {"forwarded_pushes", attacker.forwarded_pushes},
        {"withheld_acks", attacker.withheld_acks},
        {"suppressed_uplinks", attacker.suppressed_uplinks},
        {"replays", attacker.replays},
        {"pulls_sent", attacker.pulls_sent},
        {"jam_bursts", attacker.jam_bursts},
        {"recordings_corrupt", attacker.recordings_corrupt},
        {"triggers_too_late", attacker.triggers_too_late},
    };
  }

  j["ids"] = {{"alerts_by_kind", ids.alerts_by_kind}, {"total", ids.total}};
  return j;
}

std::string MetricsReport::to_csv() const {
  std::ostringstream out;
  out << "kind,id,sf,uplinks_sent,delivered,acked_genuine,acked_spoofed,presumed_lost,"
         "receptions,corrupt_fraction,pushes,pulls_sent,downlinks_sent,alerts\n";
  for (const auto& [id, d] : devices) {
    out << "device," << id << ',' << d.sf << ',' << d.uplinks_sent << ',' << d.delivered
        << ',' << d.acked_genuine << ',' << d.acked_spoofed << ',' << d.presumed_lost
        << ",,,,,,\n";
  }
  for (const auto& [id, g] : gateways) {
    out << "gateway," << id << ',' << (g.sf_label ? std::to_string(g.sf_label) : "") << ",,,,,,"
        << g.receptions << ',' << g.corrupt_fraction << ',' << g.pushes << ','
        << g.pulls_sent << ",,\n";
  }
  out << "server,server,,,,,,,," << server.corrupt_fraction << ',' << server.push_data << ','
      << server.pull_data << ',' << server.downlinks_sent << ',' << ids.total << "\n";
  return out.str();
}

} // namespace lorasim::sim
