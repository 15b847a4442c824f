#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lorasim/ids.hpp"

using namespace lorasim;
using namespace lorasim::ids;

namespace {

codec::GatewayEui eui1() {
  codec::GatewayEui e;
  e.bytes = {1, 2, 3, 4, 5, 6, 7, 8};
  return e;
}

Observation push(double t, const std::string& src, int stat) {
  Observation o;
  o.time = t;
  o.eui = eui1();
  o.source = src;
  o.kind = codec::DatagramKind::PushData;
  o.stat = stat;
  return o;
}

Observation pull(double t, const std::string& src) {
  Observation o;
  o.time = t;
  o.eui = eui1();
  o.source = src;
  o.kind = codec::DatagramKind::PullData;
  return o;
}

int count_kind(const std::vector<Alert>& alerts, Detector d) {
  int n = 0;
  for (const auto& a : alerts)
    if (a.detector == d) ++n;
  return n;
}

} // namespace

TEST_CASE("severities are fixed per detector kind") {
  CHECK(severity_of(Detector::AddressChange) == Severity::Hint);
  CHECK(severity_of(Detector::PullRate) == Severity::Warning);
  CHECK(severity_of(Detector::CrcRate) == Severity::Warning);
  CHECK(severity_of(Detector::MixedOrigin) == Severity::Critical);
  CHECK(severity_of(Detector::CorrelatedImpersonation) == Severity::Critical);
}

TEST_CASE("a clean steady stream raises nothing") {
  DetectionEngine eng;
  for (int i = 0; i < 60; ++i) {
    CHECK(eng.observe(pull(i * 10000.0, "A")).empty());
    CHECK(eng.observe(push(i * 10000.0 + 1, "A", 1)).empty());
  }
  CHECK(eng.alerts().empty());
}

TEST_CASE("address_change: first address silent, transition hints, repeat silent") {
  DetectionEngine eng;
  CHECK(eng.observe(pull(0, "A")).empty());
  auto raised = eng.observe(pull(1000, "B"));
  REQUIRE(raised.size() == 1);
  CHECK(raised[0].detector == Detector::AddressChange);
  CHECK(raised[0].severity == Severity::Hint);
  CHECK(raised[0].evidence.find("A") != std::string::npos);
  CHECK(eng.observe(pull(2000, "B")).empty());
}

TEST_CASE("mixed_origin: corrupt at one address, clean at another, within the window") {
  DetectionEngine eng;
  std::vector<Alert> all;
  for (int i = 0; i < 6; ++i) {
    for (const auto& a : eng.observe(push(i * 4000.0, "victim", -1))) all.push_back(a);
    for (const auto& a : eng.observe(push(i * 4000.0 + 1, "attacker", 1))) all.push_back(a);
  }
  CHECK(count_kind(all, Detector::MixedOrigin) == 1);
  for (const auto& a : all)
    if (a.detector == Detector::MixedOrigin) CHECK(a.severity == Severity::Critical);
}

TEST_CASE("two addresses with only clean traffic is not mixed_origin") {
  DetectionEngine eng;
  std::vector<Alert> all;
  for (int i = 0; i < 10; ++i) {
    for (const auto& a : eng.observe(push(i * 3000.0, "A", 1))) all.push_back(a);
    for (const auto& a : eng.observe(push(i * 3000.0 + 1, "B", 1))) all.push_back(a);
  }
  CHECK(count_kind(all, Detector::MixedOrigin) == 0);
}

TEST_CASE("a single address never fires mixed_origin even when half corrupt") {
  DetectionEngine eng;
  std::vector<Alert> all;
  for (int i = 0; i < 20; ++i)
    for (const auto& a : eng.observe(push(i * 2000.0, "A", i % 2 ? 1 : -1))) all.push_back(a);
  CHECK(count_kind(all, Detector::MixedOrigin) == 0);
}

TEST_CASE("pull_rate: doubling the learned keepalive rate warns") {
  DetectionEngine eng;
  std::vector<Alert> all;
  double t = 0;
  for (int i = 0; i < 7; ++i, t += 10000) // warm-up baseline: one pull per 10 s
    for (const auto& a : eng.observe(pull(t, "A"))) all.push_back(a);
  CHECK(count_kind(all, Detector::PullRate) == 0);
  for (int i = 0; i < 24; ++i, t += 5000) // two senders -> twice the rate
    for (const auto& a : eng.observe(pull(t, i % 2 ? "B" : "A"))) all.push_back(a);
  CHECK(count_kind(all, Detector::PullRate) >= 1);
}

TEST_CASE("pull_rate stays quiet on the baseline alone") {
  DetectionEngine eng;
  std::vector<Alert> all;
  for (int i = 0; i < 100; ++i)
    for (const auto& a : eng.observe(pull(i * 10000.0, "A"))) all.push_back(a);
  CHECK(count_kind(all, Detector::PullRate) == 0);
}

TEST_CASE("crc_rate: a jump from a clean baseline toward one half fires") {
  DetectionEngine eng;
  std::vector<Alert> all;
  double t = 0;
  for (int i = 0; i < 13; ++i, t += 5000) // clean warm-up
    for (const auto& a : eng.observe(push(t, "A", 1))) all.push_back(a);
  CHECK(count_kind(all, Detector::CrcRate) == 0);
  for (int i = 0; i < 40; ++i, t += 2500) // now half the copies corrupt
    for (const auto& a : eng.observe(push(t, "A", i % 2 ? 1 : -1))) all.push_back(a);
  CHECK(count_kind(all, Detector::CrcRate) >= 1);
}

TEST_CASE("a noisy baseline suppresses crc_rate: no jump, no alarm") {
  DetectionEngine eng;
  std::vector<Alert> all;
  for (int i = 0; i < 100; ++i)
    for (const auto& a : eng.observe(push(i * 2500.0, "A", i % 2 ? 1 : -1))) all.push_back(a);
  CHECK(count_kind(all, Detector::CrcRate) == 0);
}

TEST_CASE("two distinct traces within the window escalate to a correlated verdict") {
  DetectionEngine eng;
  std::vector<Alert> all;
  double t = 0;
  // clean warm-up so crc baseline is 0
  for (int i = 0; i < 13; ++i, t += 5000)
    for (const auto& a : eng.observe(push(t, "victim", 1))) all.push_back(a);
  // jam signature: victim corrupt, attacker clean
  for (int i = 0; i < 12; ++i, t += 4000) {
    for (const auto& a : eng.observe(push(t, "victim", -1))) all.push_back(a);
    for (const auto& a : eng.observe(push(t + 1, "attacker", 1))) all.push_back(a);
  }
  CHECK(count_kind(all, Detector::MixedOrigin) >= 1);
  CHECK(count_kind(all, Detector::CrcRate) >= 1);
  CHECK(count_kind(all, Detector::CorrelatedImpersonation) == 1); // idempotent per episode
  for (const auto& a : all)
    if (a.detector == Detector::CorrelatedImpersonation)
      CHECK(a.severity == Severity::Critical);
}

TEST_CASE("a lone hint never becomes a verdict") {
  DetectionEngine eng;
  std::vector<Alert> all;
  for (const auto& a : eng.observe(pull(0, "A"))) all.push_back(a);
  for (const auto& a : eng.observe(pull(1000, "B"))) all.push_back(a);
  for (const auto& a : eng.observe(pull(2000, "B"))) all.push_back(a);
  CHECK(count_kind(all, Detector::AddressChange) == 1);
  CHECK(count_kind(all, Detector::CorrelatedImpersonation) == 0);
}

TEST_CASE("out-of-order observations are rejected") {
  DetectionEngine eng;
  eng.observe(pull(1000, "A"));
  CHECK_THROWS_AS(eng.observe(pull(999, "A")), std::invalid_argument);
}

TEST_CASE("the engine is a pure function of the stream") {
  auto feed = [] {
    DetectionEngine eng;
    double t = 0;
    for (int i = 0; i < 13; ++i, t += 5000) eng.observe(push(t, "A", 1));
    for (int i = 0; i < 30; ++i, t += 3000) {
      eng.observe(push(t, "A", -1));
      eng.observe(push(t + 1, "B", 1));
      eng.observe(pull(t + 2, "B"));
    }
    return eng.alerts();
  };
  auto a = feed();
  auto b = feed();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].time == b[i].time);
    CHECK(a[i].detector == b[i].detector);
    CHECK(a[i].evidence == b[i].evidence);
  }
}
