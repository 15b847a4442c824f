#ifndef LORASIM_IDS_HPP
#define LORASIM_IDS_HPP

// Detection engine over the server-side datagram stream. Four per-EUI traces
// (address change, mixed stat origin, PULL_DATA rate, CRC-failure rate) plus
// a correlator that escalates co-occurring traces to an impersonation
// verdict. Detectors are pure functions of the observation stream and their
// own state: same stream, same alerts.

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lorasim/codec.hpp"

namespace lorasim::ids {

struct Observation {
  double time = 0; // ms
  codec::GatewayEui eui;
  std::string source; // logical network address
  codec::DatagramKind kind = codec::DatagramKind::PushData;
  std::optional<int> stat; // present only for PUSH_DATA-borne packets
};

enum class Detector {
  AddressChange,
  MixedOrigin,
  PullRate,
  CrcRate,
  CorrelatedImpersonation,
};

enum class Severity { Hint, Warning, Critical };

const char* to_string(Detector d);
const char* to_string(Severity s);
Severity severity_of(Detector d); // fixed per detector kind

struct Alert {
  double time = 0;
  Detector detector = Detector::AddressChange;
  codec::GatewayEui eui;
  Severity severity = Severity::Hint;
  std::string evidence;
};

struct EngineConfig {
  double window_ms = 60000;        // sliding window for all detectors
  double warmup_ms = 60000;        // per-EUI baseline learning period
  int min_samples = 5;             // per (address, stat-class) for mixed_origin
  double pull_rate_factor = 1.5;   // threshold multiplier over learned baseline
  double crc_baseline_max = 0.05;  // baseline corrupt fraction must not exceed
  double crc_window_min = 0.35;    // window corrupt fraction that trips the alarm
};

class DetectionEngine {
 public:
  explicit DetectionEngine(EngineConfig cfg = {});

  // Feeds all detectors; returns newly raised alerts. Throws
  // std::invalid_argument on a timestamp going backwards.
  std::vector<Alert> observe(const Observation& obs);

  const std::vector<Alert>& alerts() const { return log_; }

 private:
  struct StatSample {
    double time;
    std::string source;
    int stat;
  };
  struct EuiState {
    double first_seen = -1;
    std::string last_addr;
    // pull_rate
    std::deque<double> pulls;
    bool pull_baseline_set = false;
    double pull_baseline_count = 0; // pulls seen during warm-up
    double pull_baseline_rate = 0;  // pulls per ms
    double last_pull_alert = -1;
    // crc_rate (baseline over warm-up)
    std::deque<StatSample> stats;
    bool crc_baseline_set = false;
    long warm_stat_total = 0;
    long warm_stat_corrupt = 0;
    double crc_baseline = 0;
    double last_crc_alert = -1;
    double last_mixed_alert = -1;
    // correlation
    std::deque<std::pair<double, Detector>> recent;
    double last_verdict = -1;
  };

  void raise(std::vector<Alert>& out, EuiState& st, double t,
             const codec::GatewayEui& eui, Detector d, std::string evidence);
  void prune(EuiState& st, double now) const;

  EngineConfig cfg_;
  double last_time_ = -1;
  std::map<codec::GatewayEui, EuiState> state_;
  std::vector<Alert> log_;
};

} // namespace lorasim::ids

#endif
