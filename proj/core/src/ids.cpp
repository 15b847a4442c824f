#include "lorasim/ids.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace lorasim::ids {

const char* to_string(Detector d) {
  switch (d) {
    case Detector::AddressChange: return "address_change";
    case Detector::MixedOrigin: return "mixed_origin";
    case Detector::PullRate: return "pull_rate";
    case Detector::CrcRate: return "crc_rate";
    case Detector::CorrelatedImpersonation: return "correlated_impersonation";
  }
  return "?";
}

const char* to_string(Severity s) {
  switch (s) {
    case Severity::Hint: return "hint";
    case Severity::Warning: return "warning";
    case Severity::Critical: return "critical";
  }
  return "?";
}

Severity severity_of(Detector d) {
  switch (d) {
    case Detector::AddressChange: return Severity::Hint;
    case Detector::PullRate: return Severity::Warning;
    case Detector::CrcRate: return Severity::Warning;
    case Detector::MixedOrigin: return Severity::Critical;
    case Detector::CorrelatedImpersonation: return Severity::Critical;
  }
  return Severity::Hint;
}

namespace {
std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}
} // namespace

DetectionEngine::DetectionEngine(EngineConfig cfg) : cfg_(cfg) {}

void DetectionEngine::raise(std::vector<Alert>& out, EuiState& st, double t,
                            const codec::GatewayEui& eui, Detector d,
                            std::string evidence) {
  Alert a;
  a.time = t;
  a.detector = d;
  a.eui = eui;
  a.severity = severity_of(d);
  a.evidence = std::move(evidence);
  out.push_back(a);
  log_.push_back(out.back());
  if (d != Detector::CorrelatedImpersonation) st.recent.emplace_back(t, d);
}

void DetectionEngine::prune(EuiState& st, double now) const {
  double cutoff = now - cfg_.window_ms;
  while (!st.pulls.empty() && st.pulls.front() < cutoff) st.pulls.pop_front();
  while (!st.stats.empty() && st.stats.front().time < cutoff) st.stats.pop_front();
  while (!st.recent.empty() && st.recent.front().first < cutoff) st.recent.pop_front();
}

std::vector<Alert> DetectionEngine::observe(const Observation& obs) {
  if (obs.time < last_time_)
    throw std::invalid_argument("observations must arrive in nondecreasing time order");
  last_time_ = obs.time;

  std::vector<Alert> out;
  EuiState& st = state_[obs.eui];
  double now = obs.time;
  if (st.first_seen < 0) st.first_seen = now;

  bool warm = now >= st.first_seen + cfg_.warmup_ms;
  if (warm && !st.pull_baseline_set) {
    // Freeze baselines the first time a sample lands past the warm-up period.
    st.pull_baseline_set = true;
    st.pull_baseline_count = static_cast<double>(st.pulls.size());
    st.pull_baseline_rate = st.pull_baseline_count / cfg_.warmup_ms;
    st.crc_baseline_set = true;
    st.crc_baseline = st.warm_stat_total > 0
                          ? static_cast<double>(st.warm_stat_corrupt) /
                                static_cast<double>(st.warm_stat_total)
                          : 0.0;
  }

  // address_change: one hint per address transition; the first address seen
  // for an EUI is just recorded.
  if (st.last_addr.empty()) {
    st.last_addr = obs.source;
  } else if (obs.source != st.last_addr) {
    raise(out, st, now, obs.eui, Detector::AddressChange,
          "addr " + st.last_addr + " -> " + obs.source);
    st.last_addr = obs.source;
  }

  if (obs.kind == codec::DatagramKind::PullData) {
    st.pulls.push_back(now);
    if (!st.pull_baseline_set) {
      // still learning
    }
  }
  if (obs.stat) {
    st.stats.push_back(StatSample{now, obs.source, *obs.stat});
    if (!st.crc_baseline_set) {
      ++st.warm_stat_total;
      if (*obs.stat == -1) ++st.warm_stat_corrupt;
    }
  }

  prune(st, now);

  // pull_rate: window arrival rate must strictly exceed factor x baseline.
  // Compared via counts (n_w * warmup > factor * n_b * window) so the exact
  // boundary a sparse periodic stream reaches, e.g. 3 in-window vs 2 learned,
  // stays quiet.
  if (obs.kind == codec::DatagramKind::PullData && st.pull_baseline_set &&
      st.pull_baseline_count > 0 &&
      (st.last_pull_alert < 0 || now - st.last_pull_alert >= cfg_.window_ms)) {
    double rate = static_cast<double>(st.pulls.size()) / cfg_.window_ms;
    if (static_cast<double>(st.pulls.size()) * cfg_.warmup_ms >
        cfg_.pull_rate_factor * st.pull_baseline_count * cfg_.window_ms) {
      st.last_pull_alert = now;
      raise(out, st, now, obs.eui, Detector::PullRate,
            "pull rate " + fmt(rate * 1000.0) + "/s vs baseline " +
                fmt(st.pull_baseline_rate * 1000.0) + "/s (factor " +
                fmt(rate / st.pull_baseline_rate, 2) + ")");
    }
  }

  if (obs.stat) {
    // crc_rate: corrupt fraction in the window jumps from a clean baseline.
    if (st.crc_baseline_set && st.crc_baseline <= cfg_.crc_baseline_max &&
        static_cast<int>(st.stats.size()) >= cfg_.min_samples &&
        (st.last_crc_alert < 0 || now - st.last_crc_alert >= cfg_.window_ms)) {
      long corrupt = std::count_if(st.stats.begin(), st.stats.end(),
                                   [](const StatSample& s) { return s.stat == -1; });
      double fraction = static_cast<double>(corrupt) / static_cast<double>(st.stats.size());
      if (fraction >= cfg_.crc_window_min) {
        st.last_crc_alert = now;
        raise(out, st, now, obs.eui, Detector::CrcRate,
              "corrupt fraction " + fmt(fraction) + " over " +
                  std::to_string(st.stats.size()) + " packets, baseline " +
                  fmt(st.crc_baseline));
      }
    }

    // mixed_origin: stat=-1 concentrated at one address and stat=1 at another
    // within the window. No natural scenario explains it.
    if (st.last_mixed_alert < 0 || now - st.last_mixed_alert >= cfg_.window_ms) {
      std::map<std::string, std::pair<int, int>> per_addr; // addr -> (ok, corrupt)
      for (const auto& s : st.stats) {
        if (s.stat == 1) ++per_addr[s.source].first;
        if (s.stat == -1) ++per_addr[s.source].second;
      }
      const std::string* ok_addr = nullptr;
      const std::string* corrupt_addr = nullptr;
      int ok_n = 0, corrupt_n = 0;
      for (const auto& [addr, counts] : per_addr) {
        if (counts.first >= cfg_.min_samples && (!ok_addr || counts.first > ok_n)) {
          ok_addr = &addr;
          ok_n = counts.first;
        }
        if (counts.second >= cfg_.min_samples && (!corrupt_addr || counts.second > corrupt_n)) {
          corrupt_addr = &addr;
          corrupt_n = counts.second;
        }
      }
      if (ok_addr && corrupt_addr && *ok_addr != *corrupt_addr) {
        st.last_mixed_alert = now;
        raise(out, st, now, obs.eui, Detector::MixedOrigin,
              "stat=-1 x" + std::to_string(corrupt_n) + " from " + *corrupt_addr +
                  ", stat=1 x" + std::to_string(ok_n) + " from " + *ok_addr);
      }
    }
  }

  // correlate: two distinct detector kinds for one EUI inside the window.
  if (!out.empty() &&
      (st.last_verdict < 0 || now - st.last_verdict >= cfg_.window_ms)) {
    std::vector<Detector> kinds;
    for (const auto& [t, d] : st.recent)
      if (std::find(kinds.begin(), kinds.end(), d) == kinds.end()) kinds.push_back(d);
    if (kinds.size() >= 2) {
      st.last_verdict = now;
      std::string ev = "traces:";
      for (auto d : kinds) ev += std::string(" ") + to_string(d);
      raise(out, st, now, obs.eui, Detector::CorrelatedImpersonation, ev);
    }
  }

  return out;
}

} // namespace lorasim::ids
